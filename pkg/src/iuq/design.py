"""Experiment-design machinery.

Covers the generation of the two parameter sets of the nested design (the
bootstrap set at which ratios are estimated and the simulation set at which
runs are made), the sample-size rule tying both to the input data size, the
variance-ratio pilot that picks the per-parameter replication count r, and
the cross-validated choice of the pooling size k.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .input_models import (
    EstimationError,
    IndependentExponentials,
    MultivariateNormalKnownCov,
)


class ConfigurationError(RuntimeError):
    """Raised when an experiment configuration cannot produce valid samples."""


def sample_size_rule(m):
    """Simulation and bootstrap set sizes for input data size m.

    n = floor(m^(6/5)) simulation parameters, n_tilde = max(n, 1000)
    bootstrap parameters.  The small epsilon guards exact powers against
    floating-point round-down.
    """
    if m < 2:
        raise ValueError("input data size must be at least 2")
    n = int(math.floor(m**1.2 + 1e-9))
    return n, max(n, 1000)


@dataclass(frozen=True)
class BootstrapSet:
    """Bootstrap parameter set: n_tilde MLEs of fresh size-m resamples."""

    params: np.ndarray  # (n_tilde, d)
    theta_hat: np.ndarray
    m: int


@dataclass(frozen=True)
class SimParamSet:
    """Simulation parameter set plus the sampler that produced it."""

    params: np.ndarray  # (n, d)
    mode: str  # "bootstrap" or "ellipsoid"


def _resampled_mles(model, theta_hat, m, count, rng):
    """MLEs of ``count`` independent size-m parametric resamples at theta_hat.

    Uses the exact sampling distribution of each family's MLE (the MLE is a
    function of a sufficient statistic): for exponential rates the size-m
    sample sum is Gamma(m, 1/rate) so the resampled rate is m / Gamma draw;
    for a normal mean with known covariance the sample mean is
    N(theta_hat, cov/m).  This is distributionally identical to materializing
    the resample and calling ``model.mle`` on it.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    if isinstance(model, IndependentExponentials):
        if not model.in_support(theta_hat):
            raise ValueError("theta_hat outside the positive-rate support")
        sums = rng.gamma(shape=m, scale=1.0 / theta_hat, size=(count, model.dim))
        bad = ~(sums > 0)
        if bad.any():
            sums[bad] = rng.gamma(shape=m, scale=1.0, size=int(bad.sum())) / np.broadcast_to(
                theta_hat, sums.shape
            )[bad]
            if not (sums > 0).all():
                raise EstimationError("degenerate bootstrap resample")
        return m / sums
    if isinstance(model, MultivariateNormalKnownCov):
        noise = model.sample(np.zeros(model.dim), rng, size=count)
        return theta_hat + noise / math.sqrt(m)
    raise TypeError(f"unsupported input model {type(model).__name__}")


def bootstrap_params(model, theta_hat, m, n_tilde, rng):
    """Generate the bootstrap parameter set at theta_hat."""
    if m < 2:
        raise ValueError("resample size m must be at least 2")
    if n_tilde < 1:
        raise ValueError("bootstrap set size must be at least 1")
    params = _resampled_mles(model, theta_hat, int(m), int(n_tilde), rng)
    return BootstrapSet(params=params, theta_hat=np.asarray(theta_hat, dtype=float), m=int(m))


# -- minimum-volume enclosing ellipsoid ----------------------------------


@dataclass(frozen=True)
class Ellipsoid:
    """Ellipsoid {x : (x - center)' shape (x - center) <= 1}."""

    center: np.ndarray
    shape: np.ndarray

    def membership(self, x):
        """Quadratic form value(s); <= 1 means inside."""
        x = np.asarray(x, dtype=float)
        diff = np.atleast_2d(x) - self.center
        vals = np.einsum("ij,jk,ik->i", diff, self.shape, diff)
        return float(vals[0]) if x.ndim == 1 else vals

    def sampling_transform(self):
        """Matrix L with x = center + L u mapping the unit ball onto the ellipsoid."""
        return np.linalg.cholesky(np.linalg.inv(self.shape))

    def log_volume(self):
        d = self.center.size
        unit = 0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1.0)
        sign, logdet = np.linalg.slogdet(self.shape)
        return unit - 0.5 * logdet


def _ridge_ellipsoid(points):
    """Fallback for clouds that do not affinely span R^d: ridge-regularized
    scatter around the mean, inflated to contain every point."""
    center = points.mean(axis=0)
    diff = points - center
    scatter = diff.T @ diff / points.shape[0]
    d = points.shape[1]
    eps = 1e-9 * max(float(np.trace(scatter)), 1.0)
    shape = np.linalg.inv(scatter + eps * np.eye(d)) / d
    ell = Ellipsoid(center=center, shape=shape)
    worst = float(np.max(ell.membership(points))) if points.shape[0] else 0.0
    if worst > 1.0:
        ell = Ellipsoid(center=center, shape=shape / worst)
    return ell


def min_enclosing_ellipsoid(points, tol=1e-7, max_iter=100_000, gap_tol=5e-4):
    """Minimum-volume enclosing ellipsoid via Khachiyan's algorithm.

    Iterates until the barycentric weight update moves by less than ``tol``
    or the duality gap falls below ``gap_tol`` (whichever first; the gap
    exit keeps large instances fast at a volume error far below the
    tolerance of any consumer here).  The final shape matrix is rescaled so
    every input point satisfies membership <= 1 exactly.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = points.shape
    if n == 0:
        raise ValueError("need at least one point")
    center = points.mean(axis=0)
    if n <= d or np.linalg.matrix_rank(points - center, tol=1e-12) < d:
        return _ridge_ellipsoid(points)

    q = np.vstack([points.T, np.ones(n)])  # lifted (d+1, n)
    u = np.full(n, 1.0 / n)

    def refresh():
        x = (q * u) @ q.T
        x_inv = np.linalg.inv(x)
        return x_inv, np.einsum("ij,ji->i", q.T, x_inv @ q)

    try:
        x_inv, m_diag = refresh()
    except np.linalg.LinAlgError:
        return _ridge_ellipsoid(points)
    for it in range(int(max_iter)):
        j = int(np.argmax(m_diag))
        maximum = m_diag[j]
        if maximum <= (d + 1) * (1.0 + gap_tol):
            break
        step = (maximum - d - 1.0) / ((d + 1.0) * (maximum - 1.0))
        err = step * math.sqrt(max(1.0 - 2.0 * u[j] + u @ u, 0.0))
        u *= 1.0 - step
        u[j] += step
        if err <= tol:
            break
        if (it + 1) % 512 == 0:
            # refresh from scratch to keep rank-1 rounding drift in check
            try:
                x_inv, m_diag = refresh()
            except np.linalg.LinAlgError:
                return _ridge_ellipsoid(points)
            continue
        # rank-1 downdate of the lifted inverse and the membership diagonal
        w = x_inv @ q[:, j]
        c = step / (1.0 - step)
        beta = c / (1.0 + c * maximum)
        v = q.T @ w
        m_diag = (m_diag - beta * v * v) / (1.0 - step)
        x_inv = (x_inv - beta * np.outer(w, w)) / (1.0 - step)

    center = points.T @ u
    scatter = (points.T * u) @ points - np.outer(center, center)
    try:
        shape = np.linalg.inv(scatter) / d
    except np.linalg.LinAlgError:
        return _ridge_ellipsoid(points)
    ell = Ellipsoid(center=center, shape=shape)
    worst = float(np.max(ell.membership(points)))
    if worst > 1.0:
        ell = Ellipsoid(center=center, shape=shape / worst)
    return ell


def sample_in_ellipsoid(ellipsoid, count, rng):
    """``count`` i.i.d. points uniform inside the ellipsoid.

    Uniform in the unit ball (normalized Gaussian direction times a
    U^(1/d) radius) mapped through the ellipsoid's Cholesky factor.
    """
    d = ellipsoid.center.size
    g = rng.standard_normal((int(count), d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = rng.random(int(count)) ** (1.0 / d)
    ball = g / norms * radii[:, None]
    return ellipsoid.center + ball @ ellipsoid.sampling_transform().T


def sample_sim_params(mode, boots, model, theta_hat, m, n, rng, mvee_tol=1e-7):
    """Draw the simulation parameter set.

    ``bootstrap`` mode draws n fresh parametric-bootstrap MLEs, independent
    of the bootstrap set itself; ``ellipsoid`` mode draws uniformly inside
    the minimum-volume ellipsoid enclosing the bootstrap set, redrawing any
    points that leave the model's support.
    """
    if n < 1:
        raise ValueError("simulation set size must be at least 1")
    if mode == "bootstrap":
        params = _resampled_mles(model, theta_hat, int(m), int(n), rng)
        return SimParamSet(params=params, mode=mode)
    if mode != "ellipsoid":
        raise ValueError(f"unknown sampling mode {mode!r}")
    if boots is None or boots.params.shape[0] == 0:
        raise ValueError("ellipsoid sampling needs a non-empty bootstrap set")
    ell = min_enclosing_ellipsoid(boots.params, tol=mvee_tol)
    out = np.empty((int(n), boots.params.shape[1]))
    filled = 0
    drawn = accepted = 0
    while filled < n:
        want = max(int(n) - filled, 64)
        cand = sample_in_ellipsoid(ell, want, rng)
        ok = np.fromiter((model.in_support(c) for c in cand), dtype=bool, count=want)
        drawn += want
        accepted += int(ok.sum())
        take = cand[ok][: n - filled]
        out[filled : filled + take.shape[0]] = take
        filled += take.shape[0]
        if drawn >= 6400 and accepted < 0.01 * drawn:
            raise ConfigurationError(
                "ellipsoid rejection rate above 99%: the enclosing ellipsoid "
                "lies almost entirely outside the parameter support"
            )
    return SimParamSet(params=out, mode=mode)


# -- pilot selection of the replication count r ---------------------------


@dataclass(frozen=True)
class PilotResult:
    """Replication count chosen by the variance-ratio pilot."""

    r: int
    final_s: int
    zeta_y: float
    zeta_a: float


def zeta_estimate(r, s, b, mst, mse):
    """Estimated ratio of parameter-induced variance to simulation error
    variance at replication count r, from a b-parameter, s-run pilot.

    The (b(s-1) - 2)/(b(s-1)) factor corrects the expectation of the
    mean-square ratio so the estimator is unbiased for r * nu^2 / sigma^2
    under the homoscedastic two-level normal model.
    """
    dof = b * (s - 1)
    if dof <= 2:
        raise ValueError("pilot needs b(s-1) > 2")
    if mse <= 0:
        raise ValueError("within-parameter mean square must be positive")
    return (r / s) * ((dof - 2.0) / dof * (mst / mse) - 1.0)


def _mean_squares(outputs):
    """(MST, MSE) of a (b, s) pilot output table."""
    b, s = outputs.shape
    group_means = outputs.mean(axis=1)
    grand = group_means.mean()
    mse = float(np.sum((outputs - group_means[:, None]) ** 2) / (b * (s - 1)))
    mst = float(s * np.sum((group_means - grand) ** 2) / (b - 1))
    return mst, mse


def anova_select_r(sample_param, simulate, b=50, s0=10, ds=10, c_zeta=0.1,
                   max_s=500, max_r=10_000, rng=None):
    """Pick the replication count r from a pilot experiment.

    ``sample_param(count, rng)`` draws pilot parameters from the bootstrap
    sampling distribution; ``simulate(theta, runs, rng)`` returns the (Y, A)
    arrays of that many runs.  Runs are added in increments of ``ds`` until
    both variance-ratio estimates are positive; the returned r is the
    smallest integer at which both reach ``c_zeta``, capped at ``max_r``.
    """
    if b < 2 or s0 < 2:
        raise ValueError("need b >= 2 pilot parameters and s0 >= 2 runs")
    params = sample_param(b, rng)
    ys = np.empty((b, 0))
    as_ = np.empty((b, 0))
    s = 0
    add = s0
    while True:
        new_y = np.empty((b, add))
        new_a = np.empty((b, add))
        for i in range(b):
            yi, ai = simulate(params[i], add, rng)
            new_y[i] = yi
            new_a[i] = ai
        ys = np.hstack([ys, new_y])
        as_ = np.hstack([as_, new_a])
        s += add
        mst_y, mse_y = _mean_squares(ys)
        mst_a, mse_a = _mean_squares(as_)
        zeta1_y = zeta_estimate(1, s, b, mst_y, mse_y)
        zeta1_a = zeta_estimate(1, s, b, mst_a, mse_a)
        if zeta1_y > 0 and zeta1_a > 0:
            break
        if s + ds > max_s:
            raise EstimationError(
                f"pilot did not find positive variance ratios by s={s} "
                f"(zeta_y(s)={s * zeta1_y:.4g}, zeta_a(s)={s * zeta1_a:.4g})"
            )
        add = ds
    binding = min(zeta1_y, zeta1_a)
    r = max(1, math.ceil(c_zeta / binding))
    r = min(r, max_r)
    return PilotResult(r=int(r), final_s=int(s), zeta_y=r * zeta1_y, zeta_a=r * zeta1_a)


# -- cross-validated selection of the pooling size k ----------------------


def make_folds(n, n_folds, rng=None):
    """Partition range(n) into n_folds index arrays.

    When the fold count does not divide n, the first n mod n_folds folds
    receive one extra index.  By default indices are assigned contiguously,
    so the numerator and denominator cross-validations of one experiment
    share the same partition (their losses then correlate and the selected
    pool sizes agree whenever the two outputs are strongly dependent);
    indices are shuffled when a generator is supplied.
    """
    if not 2 <= n_folds <= n:
        raise ValueError("need 2 <= n_folds <= n")
    idx = np.arange(n) if rng is None else rng.permutation(n)
    base = n // n_folds
    extra = n % n_folds
    folds = []
    start = 0
    for p in range(n_folds):
        size = base + (1 if p < extra else 0)
        folds.append(idx[start : start + size])
        start += size
    return folds


def cv_losses(params, means, k, folds):
    """Mean per-fold squared prediction error of k-nearest-neighbor pooling.

    Each held-out parameter's run mean is predicted by the average of the
    run means of its k nearest training-fold parameters.
    """
    params = np.atleast_2d(np.asarray(params, dtype=float))
    if params.shape[0] != np.asarray(means).shape[0]:
        raise ValueError("params and means must align")
    means = np.asarray(means, dtype=float)
    losses = []
    for fold in folds:
        train = np.setdiff1d(np.arange(params.shape[0]), fold)
        if k > train.size:
            raise ValueError(f"k={k} exceeds training-fold size {train.size}")
        diff = params[fold][:, None, :] - params[train][None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        order = np.argsort(dist, axis=1, kind="stable")[:, :k]
        pred = means[train][order].mean(axis=1)
        losses.append(float(np.mean((means[fold] - pred) ** 2)))
    return losses


def default_k_grid(n):
    """Geometric candidate grid {2^j} up to half the parameter count."""
    if n < 4:
        return [1]
    top = int(math.floor(math.log2(n / 2)))
    return [2**j for j in range(1, top + 1)]


def cv_select_k(sim_params, run_means, candidates, n_folds=5, rng=None):
    """K-fold cross-validated pooling size.

    Returns the candidate with the smallest average fold loss; ties go to
    the smallest candidate.  Candidates larger than the smallest training
    fold are skipped with a warning.
    """
    params = np.atleast_2d(np.asarray(sim_params, dtype=float))
    n = params.shape[0]
    if not 2 <= n_folds <= n:
        raise ValueError("need 2 <= n_folds <= n")
    folds = make_folds(n, n_folds, rng)
    min_train = n - max(f.size for f in folds)
    usable = []
    for k in sorted(set(int(k) for k in candidates)):
        if k < 1:
            continue
        if k > min_train:
            warnings.warn(f"skipping k={k}: exceeds training-fold size {min_train}")
            continue
        usable.append(k)
    if not usable:
        raise ValueError("no usable pooling-size candidates")
    scores = [np.mean(cv_losses(params, run_means, k, folds)) for k in usable]
    return usable[int(np.argmin(scores))]
