"""Impulse-response estimation by Gaussian-process regression.

Model: ``y = Phi f + v`` with ``Phi`` the (Toeplitz) convolution matrix of the
input, ``f ~ N(0, K)`` where ``K`` is the TC Gram on the lag instants
``0, Ts, 2 Ts, ...`` and ``v ~ N(0, sigma2 I)``.  Hyperparameters
``(beta, lam, sigma2)`` are picked by maximizing the marginal likelihood over
a logarithmic grid.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .grid import TimeGrid, make_grid, uniform_grid
from .kernels import KernelSpec, gram

__all__ = [
    "IODataset",
    "SearchGrid",
    "EstimationConfig",
    "EstimationResult",
    "convolution_matrix",
    "tc_prior",
    "gp_posterior",
    "log_marginal_likelihood",
    "log_marginal_likelihood_dual",
    "evidence_surface",
    "tune_hyperparameters",
    "least_squares_fir",
    "estimate_impulse_response",
]

logger = logging.getLogger(__name__)

_JITTER_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class IODataset:
    """Uniformly sampled input/output record."""

    t: TimeGrid
    u: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if u.ndim != 1 or y.ndim != 1 or u.size != y.size or u.size != len(self.t):
            raise ValueError("t, u and y must be one-dimensional with equal lengths")
        if u.size == 0:
            raise ValueError("dataset is empty")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(y))):
            raise ValueError("u and y must be finite")
        if not self.t.is_uniform:
            raise ValueError("impulse-response estimation needs uniformly sampled data")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_arrays(cls, t, u, y) -> "IODataset":
        return cls(make_grid(t), u, y)

    @property
    def n(self) -> int:
        return self.u.size

    @property
    def sample_period(self) -> float:
        return float(self.t.times[1]) if self.n > 1 else 1.0


def _logspace(lo, hi, num):
    return tuple(np.logspace(np.log10(lo), np.log10(hi), num))


@dataclass(frozen=True)
class SearchGrid:
    """Candidate values per hyperparameter; each sorted ascending."""

    beta: tuple = field(default_factory=lambda: _logspace(0.05, 2.0, 20))
    lam: tuple = field(default_factory=lambda: _logspace(1e-4, 1e2, 15))
    sigma2: tuple = field(default_factory=lambda: _logspace(1e-4, 1e2, 15))

    def __post_init__(self):
        for name in ("beta", "lam", "sigma2"):
            values = np.asarray(getattr(self, name), dtype=float)
            if values.ndim != 1 or values.size == 0 or np.any(values <= 0):
                raise ValueError(f"search grid for {name} must be nonempty and positive")
            object.__setattr__(self, name, tuple(np.sort(values)))


@dataclass(frozen=True)
class EstimationConfig:
    m: Optional[int] = None
    search: SearchGrid = field(default_factory=SearchGrid)


@dataclass(frozen=True, eq=False)
class EstimationResult:
    f_mean: np.ndarray
    f_std: np.ndarray
    beta: float
    lam: float
    sigma2: float
    log_evidence: float
    residual_norm: float
    dof: float
    lags: np.ndarray
    evidence_check: float = float("nan")
    singular_points: int = 0

    @property
    def diagnostics(self) -> dict:
        return {
            "beta": self.beta,
            "lambda": self.lam,
            "sigma2": self.sigma2,
            "log_evidence": self.log_evidence,
            "residual_norm": self.residual_norm,
            "dof": self.dof,
            "evidence_check": self.evidence_check,
            "singular_points": self.singular_points,
        }


def convolution_matrix(u, m: int) -> np.ndarray:
    """``Phi[i, j] = u[i - j]`` for ``i >= j``, zero otherwise (zero initial state)."""
    if m < 1:
        raise ValueError("number of impulse-response coefficients must be >= 1")
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size == 0:
        raise ValueError("input must be a nonempty 1-D sequence")
    first_row = np.zeros(m)
    first_row[0] = u[0]
    return scipy.linalg.toeplitz(u, first_row)


def tc_prior(m: int, beta: float, lam: float, sample_period: float = 1.0) -> np.ndarray:
    """TC Gram on the lag instants ``0, Ts, ..., (m-1) Ts``."""
    return gram(KernelSpec.tc(beta, lam), uniform_grid(m, sample_period)).entries


def _check_dims(phi, y, K, sigma2):
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    y = np.asarray(y, dtype=float)
    K = np.asarray(K, dtype=float)
    N, m = phi.shape
    if y.shape != (N,) or K.shape != (m, m):
        raise ValueError(f"dimension mismatch: phi {phi.shape}, y {y.shape}, K {K.shape}")
    if not (np.isfinite(sigma2) and sigma2 > 0):
        raise ValueError("noise variance must be positive")
    return phi, y, K


def _factor(S):
    try:
        return scipy.linalg.cho_factor(S, lower=True)
    except np.linalg.LinAlgError:
        jitter = _JITTER_RTOL * np.trace(S)
        logger.debug("Cholesky failed; retrying with jitter %g", jitter)
        return scipy.linalg.cho_factor(S + jitter * np.eye(S.shape[0]), lower=True)


def gp_posterior(phi, y, K, sigma2: float):
    """Posterior mean and covariance of ``f`` given ``y = phi f + v``."""
    phi, y, K = _check_dims(phi, y, K, sigma2)
    KPt = K @ phi.T
    S = phi @ KPt + sigma2 * np.eye(phi.shape[0])
    c = _factor(S)
    mean = KPt @ scipy.linalg.cho_solve(c, y)
    cov = K - KPt @ scipy.linalg.cho_solve(c, KPt.T)
    return mean, 0.5 * (cov + cov.T)


def _effective_dof(phi, K, sigma2) -> float:
    """Trace of the hat matrix ``phi K phi^T (phi K phi^T + sigma2 I)^{-1}``."""
    H = phi @ K @ phi.T
    c = _factor(H + sigma2 * np.eye(H.shape[0]))
    return float(np.trace(scipy.linalg.cho_solve(c, H)))


def log_marginal_likelihood(phi, y, K, sigma2: float) -> float:
    """``log N(y; 0, phi K phi^T + sigma2 I)`` via an ``N x N`` Cholesky."""
    phi, y, K = _check_dims(phi, y, K, sigma2)
    N = y.size
    S = phi @ K @ phi.T + sigma2 * np.eye(N)
    c = _factor(S)
    alpha = scipy.linalg.cho_solve(c, y)
    logdet = 2.0 * np.sum(np.log(np.diag(c[0])))
    return float(-0.5 * y @ alpha - 0.5 * logdet - 0.5 * N * np.log(2 * np.pi))


def _root(K: np.ndarray) -> np.ndarray:
    """``Z`` with ``Z Z^T = K`` from a clipped eigendecomposition."""
    w, V = scipy.linalg.eigh(K)
    return V * np.sqrt(np.clip(w, 0.0, None))


def _spectral_terms(phi, y, K):
    Z = phi @ _root(K)
    s, U = scipy.linalg.eigh(Z.T @ Z)
    s = np.clip(s, 0.0, None)
    c = U.T @ (Z.T @ y)
    return s, c


def _dual_evidence(s, c, yy, N, lam, sigma2):
    """Vectorized evidence from the spectrum of ``Z^T Z`` (``Z Z^T = phi K phi^T``)."""
    lam = np.asarray(lam, dtype=float)[..., None]
    sigma2 = np.asarray(sigma2, dtype=float)[..., None]
    denom = sigma2 + lam * s
    quad = (yy - np.sum(lam * c**2 / denom, axis=-1)) / sigma2[..., 0]
    logdet = N * np.log(sigma2[..., 0]) + np.sum(np.log1p(lam * s / sigma2), axis=-1)
    return -0.5 * quad - 0.5 * logdet - 0.5 * N * np.log(2 * np.pi)


def log_marginal_likelihood_dual(phi, y, K, sigma2: float) -> float:
    """Same evidence as :func:`log_marginal_likelihood` through an ``m x m`` problem.

    Uses Woodbury and the determinant lemma on ``K = Z Z^T``.
    """
    phi, y, K = _check_dims(phi, y, K, sigma2)
    s, c = _spectral_terms(phi, y, K)
    return float(_dual_evidence(s, c, float(y @ y), y.size, 1.0, sigma2))


def evidence_surface(phi, y, search: SearchGrid, sample_period: float = 1.0) -> np.ndarray:
    """Log evidence on the full ``(beta, lam, sigma2)`` grid."""
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    y = np.asarray(y, dtype=float)
    m = phi.shape[1]
    lam = np.asarray(search.lam)[:, None]
    sigma2 = np.asarray(search.sigma2)[None, :]
    lam, sigma2 = np.broadcast_arrays(lam, sigma2)
    out = np.empty((len(search.beta), lam.shape[0], lam.shape[1]))
    yy = float(y @ y)
    for b, beta in enumerate(search.beta):
        # lam enters as a pure scale, so one spectrum per beta suffices
        s, c = _spectral_terms(phi, y, tc_prior(m, beta, 1.0, sample_period))
        out[b] = _dual_evidence(s, c, yy, y.size, lam, sigma2)
    return out


def tune_hyperparameters(data: IODataset, m: int, search: Optional[SearchGrid] = None,
                         phi: Optional[np.ndarray] = None) -> EstimationResult:
    """Empirical-Bayes grid search followed by the posterior at the maximizer.

    Exact ties go to the smallest ``beta``, then ``lam``, then ``sigma2``.
    """
    search = search or SearchGrid()
    if phi is None:
        phi = convolution_matrix(data.u, m)
    Ts = data.sample_period
    surface = evidence_surface(phi, data.y, search, Ts)
    finite = np.isfinite(surface)
    singular = int(surface.size - finite.sum())
    if not finite.any():
        raise ValueError("log evidence is not finite at any search grid point")
    # argmax returns the first maximizer in C order, i.e. the smallest indices
    flat = np.where(finite, surface, -np.inf)
    b, l, s = np.unravel_index(int(np.argmax(flat)), surface.shape)
    beta, lam, sigma2 = search.beta[b], search.lam[l], search.sigma2[s]
    for name, idx, values in (("beta", b, search.beta), ("lambda", l, search.lam),
                              ("sigma2", s, search.sigma2)):
        if len(values) > 1 and idx in (0, len(values) - 1):
            logger.info("selected %s=%g lies on the search grid edge", name, values[idx])
    K = tc_prior(m, beta, lam, Ts)
    mean, cov = gp_posterior(phi, data.y, K, sigma2)
    residual = data.y - phi @ mean
    direct = log_marginal_likelihood(phi, data.y, K, sigma2)
    dof = _effective_dof(phi, K, sigma2)
    return EstimationResult(
        f_mean=mean,
        f_std=np.sqrt(np.clip(np.diag(cov), 0.0, None)),
        beta=float(beta),
        lam=float(lam),
        sigma2=float(sigma2),
        log_evidence=float(surface[b, l, s]),
        residual_norm=float(np.linalg.norm(residual)),
        dof=dof,
        lags=Ts * np.arange(m),
        evidence_check=float(abs(direct - surface[b, l, s])),
        singular_points=singular,
    )


def least_squares_fir(data: IODataset, m: int) -> np.ndarray:
    """Unregularized least-squares FIR estimate (the baseline)."""
    phi = convolution_matrix(data.u, m)
    return scipy.linalg.lstsq(phi, data.y)[0]


def estimate_impulse_response(data: IODataset,
                              config: Optional[EstimationConfig] = None) -> EstimationResult:
    """Build the regressors, tune the TC prior and return the posterior."""
    config = config or EstimationConfig()
    m = config.m if config.m is not None else min(data.n, 100)
    if not 1 <= m <= data.n:
        raise ValueError(f"m must be in 1..{data.n}, got {m}")
    return tune_hyperparameters(data, m, config.search)
