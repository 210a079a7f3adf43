"""Gaussian differential entropies and maximum-entropy checks.

All quantities are in nats.  Entropies are computed from known covariance
matrices, never estimated from samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.linalg

from .grid import TimeGrid
from .kernels import Family, KernelSpec, gram
from .processes import increment_matrix

__all__ = [
    "LOG_2PIE",
    "SINGULAR",
    "EntropyReport",
    "ConstrainedCovariance",
    "gaussian_entropy",
    "white_noise_rate",
    "chain_rule_residual",
    "cumsum_matrix",
    "increment_covariance",
    "constrained_covariance",
    "maxent_gap",
    "random_correlation",
    "random_constrained_covariance",
    "entropy_rate_curve",
]

LOG_2PIE = float(np.log(2 * np.pi * np.e))

#: Returned by :func:`gaussian_entropy` for singular covariances.
SINGULAR = -np.inf

_PIVOT_RTOL = 1e-12
_INDEFINITE_RTOL = 1e-10
_FEASIBILITY_TOL = 1e-8


@dataclass(frozen=True)
class EntropyReport:
    """Joint entropy of the first ``n`` variables of a process and its rate.

    ``log_increment_sum`` is ``sum log sqrt(dt)`` over the increments
    involved (zero when it does not apply); it lets one watch the rate
    correction diverge on grids whose spacing is not bounded below.
    """

    n: int
    joint_entropy: float
    rate: float
    reference_rate: float
    log_increment_sum: float = 0.0


def _symmetric(sigma) -> np.ndarray:
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError("covariance must be a square matrix")
    if not np.all(np.isfinite(sigma)):
        raise ValueError("covariance has non-finite entries")
    scale = max(float(np.max(np.abs(sigma))), np.finfo(float).tiny)
    if np.max(np.abs(sigma - sigma.T)) > 1e-12 * scale:
        raise ValueError("covariance is not symmetric")
    return sigma


def gaussian_entropy(sigma) -> float:
    """Differential entropy ``0.5 * (n log(2 pi e) + logdet sigma)``.

    Singular (boundary) covariances return :data:`SINGULAR` (``-inf``);
    indefinite ones raise ``ValueError``.  A Cholesky pivot whose square is
    at or below ``1e-12 * trace`` counts as singular.
    """
    sigma = _symmetric(sigma)
    n = sigma.shape[0]
    trace = float(np.trace(sigma))
    try:
        L = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        lo = scipy.linalg.eigvalsh(sigma, subset_by_index=[0, 0])[0]
        if lo < -_INDEFINITE_RTOL * max(trace, np.finfo(float).tiny):
            raise ValueError(f"covariance is indefinite (min eigenvalue {lo:.3g})") from None
        return SINGULAR
    pivots = np.diag(L) ** 2
    if trace <= 0 or np.any(pivots <= _PIVOT_RTOL * trace):
        return SINGULAR
    return 0.5 * (n * LOG_2PIE + 2.0 * float(np.sum(np.log(np.diag(L)))))


def white_noise_rate(lam: float) -> float:
    """Entropy rate of Gaussian white noise with variance ``lam``."""
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"lambda must be positive, got {lam!r}")
    return 0.5 * (LOG_2PIE + float(np.log(lam)))


def chain_rule_residual(grid: TimeGrid, lam: float) -> float:
    """``H(G) - H(W) - log|A|`` for the Wiener process on ``t_1..t_n``.

    ``G`` are the Wiener levels, ``W`` the rescaled increments (white noise
    with variance ``lam``) and ``A`` the increment matrix with ``G = A W``.
    """
    if len(grid) < 2:
        raise ValueError("chain rule needs at least two grid points")
    n = len(grid) - 1
    h_levels = gaussian_entropy(gram(KernelSpec.wiener(lam), grid.times[1:]).entries)
    h_white = n * white_noise_rate(lam)
    return h_levels - h_white - increment_matrix(grid).log_abs_det


def cumsum_matrix(n: int) -> np.ndarray:
    """Lower-triangular ones: maps increments to levels when ``g(t_0) = 0``."""
    return np.tril(np.ones((n, n)))


def increment_covariance(sigma) -> np.ndarray:
    """Covariance of ``g(t_i) - g(t_{i-1})``, ``i = 1..n``, given levels' ``sigma``."""
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0]
    D = np.eye(n) - np.eye(n, k=-1)
    return D @ sigma @ D.T


@dataclass(frozen=True, eq=False)
class ConstrainedCovariance:
    """Covariance of ``g(t_1..t_n)`` for a zero-mean process pinned at ``g(t_0) = 0``
    whose increments satisfy ``Var[g(t_{i+1}) - g(t_i)] = lam (t_{i+1} - t_i)``.
    """

    sigma: np.ndarray
    grid: TimeGrid
    lam: float

    def __post_init__(self):
        sigma = _symmetric(self.sigma)
        n = len(self.grid) - 1
        if n < 1 or sigma.shape != (n, n):
            raise ValueError(f"sigma must be {n}x{n} for a grid of {len(self.grid)} points")
        target = self.lam * self.grid.increments
        got = np.diag(increment_covariance(sigma))
        tol = _FEASIBILITY_TOL * max(1.0, float(target.max()))
        if np.max(np.abs(got - target)) > tol:
            raise ValueError(
                f"infeasible candidate: increment variances {got} differ from {target}"
            )
        try:
            np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            trace = float(np.trace(sigma))
            lo = scipy.linalg.eigvalsh(sigma, subset_by_index=[0, 0])[0]
            if lo < -_INDEFINITE_RTOL * trace:
                raise ValueError(f"candidate is not PSD (min eigenvalue {lo:.3g})") from None
        sigma = sigma.copy()
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)

    @property
    def increments(self) -> np.ndarray:
        return increment_covariance(self.sigma)


def constrained_covariance(grid: TimeGrid, lam: float, correlation=None) -> ConstrainedCovariance:
    """Feasible candidate whose increments have the given correlation matrix.

    ``correlation=None`` means independent increments, i.e. the Wiener Gram.
    """
    n = len(grid) - 1
    R = np.eye(n) if correlation is None else np.asarray(correlation, dtype=float)
    scale = np.sqrt(lam * grid.increments)
    inc_cov = R * np.outer(scale, scale)
    S = cumsum_matrix(n)
    sigma = S @ inc_cov @ S.T
    return ConstrainedCovariance(0.5 * (sigma + sigma.T), grid, float(lam))


def maxent_gap(candidate: ConstrainedCovariance) -> float:
    """Entropy of the Wiener process minus entropy of ``candidate``.

    Both live on the same grid with the same increment-variance constraint,
    so the gap is never negative (up to rounding).
    """
    return _wiener_entropy(candidate.grid, candidate.lam) - gaussian_entropy(candidate.sigma)


@lru_cache(maxsize=256)
def _wiener_entropy(grid: TimeGrid, lam: float) -> float:
    return gaussian_entropy(gram(KernelSpec.wiener(lam), grid.times[1:]).entries)


def random_correlation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random correlation matrix from orthogonal mixing of a random spectrum."""
    if n == 1:
        return np.ones((1, 1))
    Q, r = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(r))
    spectrum = rng.exponential(size=n) + 1e-3
    M = (Q * spectrum) @ Q.T
    d = np.sqrt(np.diag(M))
    R = M / np.outer(d, d)
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 1.0)
    return R


def random_constrained_covariance(grid: TimeGrid, lam: float, seed: int) -> ConstrainedCovariance:
    """Reproducible random point of the feasible set for ``(grid, lam)``."""
    if len(grid) < 2:
        raise ValueError("need at least two grid points")
    rng = np.random.default_rng(seed)
    return constrained_covariance(grid, lam, random_correlation(len(grid) - 1, rng))


def _tc_reference(times: np.ndarray, spec: KernelSpec) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form TC entropy pieces via the Wiener representation on warped time.

    Returns ``(log_increment_sums, reference_rates)`` indexed by ``n - 1``.
    """
    n_max = times.size
    out_sum = np.empty(n_max)
    for n in range(1, n_max + 1):
        taus = np.sort(np.exp(-spec.beta * times[:n]))
        out_sum[n - 1] = 0.5 * np.sum(np.log(np.diff(np.concatenate(([0.0], taus)))))
    ns = np.arange(1, n_max + 1)
    return out_sum, white_noise_rate(spec.lam) + out_sum / ns


def entropy_rate_curve(spec: KernelSpec, grid: TimeGrid,
                       n_max: Optional[int] = None) -> list[EntropyReport]:
    """Joint entropy and rate of the first ``n`` variables, ``n = 1..n_max``.

    Variables are ``f(t_0), f(t_1), ...`` for the TC and white-noise kernels
    and ``g(t_1), g(t_2), ...`` for the Wiener kernel (``g(t_0) = 0`` carries
    no entropy).  ``reference_rate`` is the closed form: ``0.5 log(2 pi e
    sigma2)`` for white noise and ``0.5 log(2 pi e lam) + (1/n) sum log
    sqrt(dt)`` for Wiener and (on warped time) TC.
    """
    if spec.family is Family.WIENER:
        times = grid.times[1:]
    else:
        times = grid.times
    if n_max is None:
        n_max = times.size
    if n_max < 1 or n_max > times.size:
        raise ValueError(f"n_max must be in 1..{times.size} for this grid and kernel")
    times = times[:n_max]
    K = gram(spec, times).entries
    ns = np.arange(1, n_max + 1)
    if spec.family is Family.WHITE:
        log_sums = np.zeros(n_max)
        refs = np.full(n_max, white_noise_rate(spec.sigma2))
    elif spec.family is Family.WIENER:
        log_sums = np.cumsum(0.5 * np.log(grid.increments[:n_max]))
        refs = white_noise_rate(spec.lam) + log_sums / ns
    else:
        log_sums, refs = _tc_reference(times, spec)
    reports = []
    for n in ns:
        h = gaussian_entropy(K[:n, :n])
        reports.append(EntropyReport(int(n), h, h / n, float(refs[n - 1]), float(log_sums[n - 1])))
    return reports
