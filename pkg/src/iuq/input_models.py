"""Parametric input-generating distributions.

Each model family supports sampling, log-density evaluation, maximum
likelihood estimation, and likelihood-ratio weights over the traces of raw
inputs consumed by a simulation run.  Likelihood ratios are accumulated in
log space: products of hundreds of per-draw densities overflow or underflow
in linear space.

Model objects are immutable after construction; all randomness flows
through caller-supplied ``numpy.random.Generator`` streams.
"""

import numpy as np
from dataclasses import dataclass


class EstimationError(RuntimeError):
    """Raised when an estimator cannot be computed (degenerate data/pool)."""


@dataclass(frozen=True)
class InputTrace:
    """Raw inputs consumed by one simulation run.

    ``blocks`` holds one array per input source: for a d-coordinate
    exponential model, d one-dimensional arrays of the draws consumed from
    each coordinate (lengths may differ); for a multivariate normal model a
    single (S, d) array of the S vector draws.
    """

    blocks: tuple

    def __post_init__(self):
        if len(self.blocks) == 0 or sum(np.size(b) for b in self.blocks) == 0:
            raise ValueError("trace must contain at least one draw")

    @property
    def size(self):
        return int(sum(np.asarray(b).shape[0] for b in self.blocks))


def _as_theta(theta, dim):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (dim,):
        raise ValueError(f"parameter must have shape ({dim},), got {theta.shape}")
    return theta


class IndependentExponentials:
    """d independent exponential coordinates parameterized by rates.

    A parameter vector is the vector of rates (all strictly positive); one
    realization is a d-vector with one draw per coordinate.  Traces may
    contain unequal numbers of draws per coordinate, as happens in
    regenerative simulations.
    """

    def __init__(self, dim):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = int(dim)

    def __repr__(self):
        return f"IndependentExponentials(dim={self.dim})"

    def in_support(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        return theta.shape == (self.dim,) and bool(np.all(theta > 0)) and bool(
            np.all(np.isfinite(theta))
        )

    def _check_theta(self, theta):
        theta = _as_theta(theta, self.dim)
        if not (np.all(theta > 0) and np.all(np.isfinite(theta))):
            raise ValueError(f"rates must be strictly positive, got {theta}")
        return theta

    def sample(self, theta, rng, size=None):
        """Draw i.i.d. realizations from the model; shape (size, d) or (d,)."""
        theta = self._check_theta(theta)
        if size is None:
            return rng.exponential(1.0 / theta)
        return rng.exponential(1.0 / theta, size=(int(size), self.dim))

    def log_pdf(self, theta, z):
        """Log joint density of one realization z; -inf outside the support."""
        theta = self._check_theta(theta)
        z = np.asarray(z, dtype=float)
        if z.shape != (self.dim,):
            raise ValueError(f"realization must have shape ({self.dim},)")
        if np.any(z < 0):
            return -np.inf
        return float(np.sum(np.log(theta) - theta * z))

    def mle(self, data):
        """Per-coordinate rate = 1 / sample mean."""
        data = np.asarray(data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.shape[0] == 0 or data.shape[1] != self.dim:
            raise EstimationError(f"need non-empty (m, {self.dim}) data")
        if np.any(data <= 0):
            raise EstimationError("exponential observations must be positive")
        means = data.mean(axis=0)
        if np.any(means == 0):
            raise EstimationError("sample mean is zero")
        return 1.0 / means

    # -- trace machinery -------------------------------------------------

    def trace_stats(self, trace):
        """Sufficient statistics (per-coordinate counts and sums) of a trace."""
        if len(trace.blocks) != self.dim:
            raise ValueError(f"trace must have {self.dim} blocks")
        counts = np.array([np.asarray(b).shape[0] for b in trace.blocks], dtype=float)
        sums = np.array([np.asarray(b, dtype=float).sum() for b in trace.blocks])
        return counts, sums

    def log_lr(self, trace, theta_from, theta_to):
        """Log likelihood ratio of a trace under theta_to versus theta_from."""
        counts, sums = self.trace_stats(trace)
        return float(self.log_weights(counts, sums, theta_from, theta_to))

    def log_weights(self, counts, sums, thetas_from, theta_to):
        """Batched log-LR from sufficient statistics.

        ``counts`` and ``sums`` have shape (..., d), ``thetas_from`` broadcasts
        against them, ``theta_to`` is a single target parameter.  Returns an
        array of shape (...,).
        """
        theta_to = self._check_theta(theta_to)
        thetas_from = np.asarray(thetas_from, dtype=float)
        log_ratio = np.log(theta_to) - np.log(thetas_from)
        return np.sum(
            np.asarray(counts) * log_ratio - (theta_to - thetas_from) * np.asarray(sums),
            axis=-1,
        )


class MultivariateNormalKnownCov:
    """Multivariate normal with unknown mean and fixed covariance.

    Only the mean vector is an unknown parameter; the covariance is known
    and never estimated.  The MLE of the mean is the sample mean.
    """

    def __init__(self, cov):
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        if cov.shape[0] != cov.shape[1] or not np.allclose(cov, cov.T):
            raise ValueError("covariance must be square symmetric")
        # fails for non positive definite covariances
        self._chol = np.linalg.cholesky(cov)
        self.cov = cov
        self.prec = np.linalg.inv(cov)
        self.dim = cov.shape[0]
        sign, logdet = np.linalg.slogdet(cov)
        self._log_norm = -0.5 * (self.dim * np.log(2.0 * np.pi) + logdet)

    def __repr__(self):
        return f"MultivariateNormalKnownCov(dim={self.dim})"

    def in_support(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        return theta.shape == (self.dim,) and bool(np.all(np.isfinite(theta)))

    def _check_theta(self, theta):
        theta = _as_theta(theta, self.dim)
        if not np.all(np.isfinite(theta)):
            raise ValueError("mean vector must be finite")
        return theta

    def sample(self, theta, rng, size=None):
        theta = self._check_theta(theta)
        n = 1 if size is None else int(size)
        z = rng.standard_normal((n, self.dim))
        out = theta + z @ self._chol.T
        return out[0] if size is None else out

    def log_pdf(self, theta, z):
        theta = self._check_theta(theta)
        z = np.asarray(z, dtype=float)
        if z.shape != (self.dim,):
            raise ValueError(f"realization must have shape ({self.dim},)")
        resid = z - theta
        return float(self._log_norm - 0.5 * resid @ self.prec @ resid)

    def mle(self, data):
        data = np.asarray(data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.shape[0] == 0 or data.shape[1] != self.dim:
            raise EstimationError(f"need non-empty (m, {self.dim}) data")
        return data.mean(axis=0)

    # -- trace machinery -------------------------------------------------

    def trace_stats(self, trace):
        """Sufficient statistics (#draws and vector sum) of a trace.

        Returned in the same (counts, sums) layout as the exponential
        family: counts is the draw count repeated per coordinate.
        """
        if len(trace.blocks) != 1:
            raise ValueError("trace must hold a single (S, d) block")
        block = np.atleast_2d(np.asarray(trace.blocks[0], dtype=float))
        if block.shape[1] != self.dim:
            raise ValueError(f"draws must have {self.dim} columns")
        counts = np.full(self.dim, float(block.shape[0]))
        return counts, block.sum(axis=0)

    def log_lr(self, trace, theta_from, theta_to):
        counts, sums = self.trace_stats(trace)
        return float(self.log_weights(counts, sums, theta_from, theta_to))

    def log_weights(self, counts, sums, thetas_from, theta_to):
        """Batched log-LR from sufficient statistics; see the exponential twin.

        For c draws with vector sum s the log ratio is
        (mu1 - mu0)' P s - c/2 (mu1' P mu1 - mu0' P mu0) with P the precision.
        """
        theta_to = self._check_theta(theta_to)
        thetas_from = np.asarray(thetas_from, dtype=float)
        counts = np.asarray(counts, dtype=float)[..., 0]
        sums = np.asarray(sums, dtype=float)
        quad_to = theta_to @ self.prec @ theta_to
        quad_from = np.einsum("...i,ij,...j->...", thetas_from, self.prec, thetas_from)
        lin = (sums @ self.prec.T) @ theta_to - np.einsum(
            "...i,ij,...j->...", sums, self.prec, thetas_from
        )
        return lin - 0.5 * counts * (quad_to - quad_from)
