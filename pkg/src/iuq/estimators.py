"""Ratio estimators over a table of simulation runs.

Three estimators of eta(theta) = E[Y|theta]/E[A|theta] at a target
parameter: the standard ratio of that parameter's own run means, the
k-nearest-neighbor ratio that pools run means across nearby simulation
parameters, and the likelihood-ratio variant that reweights each pooled
run to be unbiased for the target parameter before pooling.

Pooling only ever draws from *eligible* simulation parameters, those whose
average denominator output is nonzero; the filter applies to numerator and
denominator pools alike.
"""

from dataclasses import dataclass, field

import numpy as np

from .input_models import EstimationError

# log-weights are clamped here before exponentiation; exp(700) is still
# representable, anything larger would overflow to inf
LOG_WEIGHT_CLAMP = 700.0


@dataclass(frozen=True)
class RatioEstimate:
    """One ratio estimate plus how it was produced."""

    value: float
    method: str  # "std", "knn", or "klr"
    k_y: int = 0
    k_a: int = 0
    fallback: bool = False
    pooled_denominator: float = 0.0
    clamped_weights: int = 0

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise EstimationError(f"non-finite ratio estimate ({self.method})")


class NeighborIndex:
    """Euclidean k-nearest-neighbor queries over the simulation parameters.

    The reference implementation is a brute-force distance scan with ties
    broken by insertion index, which makes queries deterministic.  The
    optional 'kdtree' backend delegates to scipy's cKDTree and is validated
    against the scan in the test suite.
    """

    def __init__(self, params, backend="brute"):
        self.params = np.atleast_2d(np.asarray(params, dtype=float))
        if backend not in ("brute", "kdtree"):
            raise ValueError(f"unknown backend {backend!r}")
        self.backend = backend
        self._tree = None
        if backend == "kdtree":
            from scipy.spatial import cKDTree

            self._tree = cKDTree(self.params)

    def __len__(self):
        return self.params.shape[0]

    def query(self, theta, k, mask=None):
        """Indices of the k nearest eligible parameters, closest first.

        ``mask`` marks eligible entries; ties in distance resolve to the
        smaller index.
        """
        theta = np.asarray(theta, dtype=float)
        n = len(self)
        if mask is None:
            eligible = np.arange(n)
        else:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != (n,):
                raise ValueError("mask must have one entry per parameter")
            eligible = np.flatnonzero(mask)
        if not 1 <= k <= eligible.size:
            raise ValueError(f"k must lie in [1, {eligible.size}], got {k}")
        if self._tree is not None and mask is None:
            _, idx = self._tree.query(theta, k=k)
            return np.atleast_1d(idx).astype(int)
        diff = self.params[eligible] - theta
        dist = np.einsum("ij,ij->i", diff, diff)
        order = np.argsort(dist, kind="stable")[:k]
        return eligible[order]


def knn_query(index, theta, k, mask=None):
    """Functional form of ``NeighborIndex.query``."""
    return index.query(theta, k, mask)


@dataclass(frozen=True)
class RunTable:
    """r simulation runs at each of n parameters, with cached means and the
    per-run trace statistics needed for likelihood-ratio reweighting.

    ``lr_params`` are the trace-model parameters of each simulation
    parameter (identical to ``params`` unless the testbed maps them).
    """

    params: np.ndarray  # (n, d)
    y: np.ndarray  # (n, r)
    a: np.ndarray  # (n, r)
    trace_model: object = None
    counts: np.ndarray = None  # (n, r, d)
    sums: np.ndarray = None  # (n, r, d)
    lr_params: np.ndarray = None
    y_mean: np.ndarray = field(init=False)
    a_mean: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.y.shape != self.a.shape or self.y.ndim != 2:
            raise ValueError("y and a must both have shape (n, r)")
        if self.params.shape[0] != self.y.shape[0]:
            raise ValueError("one parameter row per run row required")
        object.__setattr__(self, "y_mean", self.y.mean(axis=1))
        object.__setattr__(self, "a_mean", self.a.mean(axis=1))
        if self.lr_params is None:
            object.__setattr__(self, "lr_params", self.params)

    @property
    def n_params(self):
        return self.params.shape[0]

    @property
    def runs_per_param(self):
        return self.y.shape[1]

    def eligible(self):
        """Mask of parameters whose average denominator output is nonzero."""
        return self.a_mean != 0


def build_run_table(testbed, params, r, rng, collect_stats=True):
    """Simulate r runs at each parameter and assemble the run table."""
    params = np.atleast_2d(np.asarray(params, dtype=float))
    n, d = params.shape
    if r < 1:
        raise ValueError("need at least one run per parameter")
    y = np.empty((n, r))
    a = np.empty((n, r))
    counts = np.empty((n, r, d)) if collect_stats else None
    sums = np.empty((n, r, d)) if collect_stats else None
    for j in range(n):
        batch = testbed.simulate(params[j], r, rng, collect_stats=collect_stats)
        y[j] = batch.y
        a[j] = batch.a
        if collect_stats:
            counts[j] = batch.counts
            sums[j] = batch.sums
    lr_params = np.array([testbed.lr_param(p) for p in params]) if collect_stats else None
    return RunTable(
        params=params,
        y=y,
        a=a,
        trace_model=testbed.trace_model if collect_stats else None,
        counts=counts,
        sums=sums,
        lr_params=lr_params,
    )


def std_ratio(y, a):
    """Standard ratio of run means; flags a zero denominator for fallback."""
    y = np.asarray(y, dtype=float)
    a = np.asarray(a, dtype=float)
    if y.size < 1 or y.shape != a.shape:
        raise ValueError("need matching non-empty run outputs")
    a_bar = float(a.mean())
    if a_bar == 0.0:
        return RatioEstimate(value=0.0, method="std", fallback=True, pooled_denominator=0.0)
    return RatioEstimate(
        value=float(y.mean()) / a_bar, method="std", pooled_denominator=a_bar
    )


def knn_ratio(table, index, theta_tilde, k_y, k_a):
    """Pooled-mean ratio over the k nearest eligible simulation parameters.

    Numerator and denominator pool k_y and k_a neighbors respectively, both
    taken from the same distance-ordered eligible list.
    """
    mask = table.eligible()
    n_eligible = int(mask.sum())
    if n_eligible == 0:
        raise EstimationError("no eligible simulation parameters to pool from")
    if not (1 <= k_y <= n_eligible and 1 <= k_a <= n_eligible):
        raise ValueError(f"pool sizes must lie in [1, {n_eligible}]")
    nbrs = index.query(theta_tilde, max(k_y, k_a), mask=mask)
    num = float(table.y_mean[nbrs[:k_y]].mean())
    den = float(table.a_mean[nbrs[:k_a]].mean())
    if den == 0.0:
        raise EstimationError("pooled denominator vanished")
    return RatioEstimate(
        value=num / den, method="knn", k_y=int(k_y), k_a=int(k_a), pooled_denominator=den
    )


def _lr_run_means(table, nbrs, lr_target):
    """Likelihood-ratio reweighted run means of the neighbor rows.

    Returns per-neighbor averages of Y*W and A*W with W the trace LR from
    each run's own parameter to the target, plus the clamp counter.
    """
    if table.trace_model is None or table.counts is None:
        raise EstimationError("run table carries no trace statistics")
    log_w = table.trace_model.log_weights(
        table.counts[nbrs], table.sums[nbrs], table.lr_params[nbrs][:, None, :], lr_target
    )
    clamped = int(np.count_nonzero(log_w > LOG_WEIGHT_CLAMP))
    w = np.exp(np.minimum(log_w, LOG_WEIGHT_CLAMP))
    finite = np.isfinite(w)
    if not finite.all():
        w = np.where(finite, w, 0.0)
        denom = np.maximum(finite.sum(axis=1), 1)
        y_lr = (table.y[nbrs] * w).sum(axis=1) / denom
        a_lr = (table.a[nbrs] * w).sum(axis=1) / denom
    else:
        y_lr = (table.y[nbrs] * w).mean(axis=1)
        a_lr = (table.a[nbrs] * w).mean(axis=1)
    return y_lr, a_lr, clamped


def klr_ratio(table, index, theta_tilde, k_y, k_a, lr_target=None):
    """Ratio of likelihood-ratio reweighted pooled means.

    Each pooled run is reweighted by the trace likelihood ratio from its own
    simulation parameter to the target, which removes the pooling bias of
    the plain k-nearest-neighbor estimator.  ``lr_target`` overrides the
    target's trace-model parameter when the testbed maps parameters.
    """
    mask = table.eligible()
    n_eligible = int(mask.sum())
    if n_eligible == 0:
        raise EstimationError("no eligible simulation parameters to pool from")
    if not (1 <= k_y <= n_eligible and 1 <= k_a <= n_eligible):
        raise ValueError(f"pool sizes must lie in [1, {n_eligible}]")
    theta_tilde = np.asarray(theta_tilde, dtype=float)
    target = theta_tilde if lr_target is None else np.asarray(lr_target, dtype=float)
    nbrs = index.query(theta_tilde, max(k_y, k_a), mask=mask)
    y_lr, a_lr, clamped = _lr_run_means(table, nbrs, target)
    num = float(y_lr[:k_y].mean())
    den = float(a_lr[:k_a].mean())
    if den == 0.0:
        raise EstimationError("pooled denominator vanished")
    return RatioEstimate(
        value=num / den,
        method="klr",
        k_y=int(k_y),
        k_a=int(k_a),
        pooled_denominator=den,
        clamped_weights=clamped,
    )


def klr_fallback_k1(table, index, theta_tilde, lr_target=None):
    """Reweighted ratio pooling only the nearest eligible parameter.

    Used in place of the standard estimator when that estimator's own
    denominator is zero.
    """
    est = klr_ratio(table, index, theta_tilde, k_y=1, k_a=1, lr_target=lr_target)
    return RatioEstimate(
        value=est.value,
        method="klr",
        k_y=1,
        k_a=1,
        fallback=True,
        pooled_denominator=est.pooled_denominator,
        clamped_weights=est.clamped_weights,
    )
