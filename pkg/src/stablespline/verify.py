"""Numerical property suite for the maximum-entropy results.

Each check returns a :class:`CheckResult`; :func:`run_suite` runs a named
group of checks.  Everything is seeded, so a run is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .entropy import (
    LOG_2PIE,
    chain_rule_residual,
    constrained_covariance,
    entropy_rate_curve,
    gaussian_entropy,
    maxent_gap,
    random_constrained_covariance,
    random_correlation,
    white_noise_rate,
)
from .grid import TimeGrid, exp_transform, make_grid, uniform_grid
from .kernels import KernelSpec, eval_kernel, gram, min_eigenvalue
from .processes import (
    empirical_covariance,
    finite_difference,
    increment_matrix,
    sample_stable_spline,
    sample_white,
    sample_wiener,
)

__all__ = ["CheckResult", "SUITES", "random_grid", "run_suite", "format_table"]

MC_RTOL = 0.03


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""


def random_grid(rng: np.random.Generator, n: int, low: float = 0.05, high: float = 1.0) -> TimeGrid:
    """``n``-point grid from the origin with i.i.d. uniform gaps in ``[low, high)``."""
    gaps = rng.uniform(low, high, size=n - 1)
    return make_grid(np.concatenate(([0.0], np.cumsum(gaps))))


def _normalized_error(C: np.ndarray, K: np.ndarray) -> float:
    scale = np.sqrt(np.outer(np.diag(K), np.diag(K)))
    return float(np.max(np.abs(C - K) / scale))


def correlation_gap_bound(increment_cov: np.ndarray) -> float:
    """``-0.5 log(1 - rho_max^2)`` for the largest increment correlation."""
    d = np.sqrt(np.diag(increment_cov))
    R = increment_cov / np.outer(d, d)
    off = np.abs(R[~np.eye(R.shape[0], dtype=bool)])
    rho = float(off.max()) if off.size else 0.0
    return -0.5 * float(np.log1p(-rho * rho))


def check_white_noise(seed: int, n_candidates: int = 1000, n: int = 8) -> list[CheckResult]:
    rng = np.random.default_rng([seed, 1])
    bound = n * 0.5 * LOG_2PIE
    worst = -np.inf
    for _ in range(n_candidates):
        worst = max(worst, gaussian_entropy(random_correlation(n, rng)) - bound)
    equal = abs(gaussian_entropy(np.eye(n)) - bound)
    rate_err = 0.0
    for lam in (0.3, 1.0, 7.0):
        reports = entropy_rate_curve(KernelSpec.white(lam), uniform_grid(50))
        rate_err = max(rate_err, max(abs(r.rate - white_noise_rate(lam)) for r in reports))
    return [
        CheckResult("white_noise.unit_variance_entropy_bound", worst <= 1e-10, worst, 1e-10,
                    f"{n_candidates} random correlation matrices, n={n}"),
        CheckResult("white_noise.white_noise_attains_bound", equal <= 1e-12, equal, 1e-12),
        CheckResult("white_noise.white_noise_rate", rate_err < 1e-12, rate_err, 1e-12),
    ]


def check_increments(seed: int, n_paths: int = 100_000, n_grids: int = 100) -> list[CheckResult]:
    rng = np.random.default_rng([seed, 2])
    grid = random_grid(rng, 10)
    lam = 1.5
    paths = sample_wiener(grid, lam, seed, n_paths)
    w = finite_difference(paths).values / np.sqrt(grid.increments)
    var_err = float(np.max(np.abs(w.var(axis=0, ddof=1) / lam - 1.0)))
    corr = np.corrcoef(w, rowvar=False)
    off = float(np.max(np.abs(corr[~np.eye(corr.shape[0], dtype=bool)])))
    ci = 4.0 / np.sqrt(n_paths)
    worst = 0.0
    for k in range(n_grids):
        g = random_grid(rng, int(rng.integers(2, 51)))
        white = sample_white(g, lam, seed + k, 16).values
        direct = sample_wiener(g, lam, seed + k, 16).values[:, 1:]
        via_matrix = white[:, 1:] @ increment_matrix(g).entries.T
        worst = max(worst, float(np.max(np.abs(direct - via_matrix))))
    return [
        CheckResult("increments.rescaled_increment_variance", var_err <= MC_RTOL, var_err, MC_RTOL),
        CheckResult("increments.rescaled_increment_whiteness", off <= ci, off, ci),
        CheckResult("increments.cumulative_equals_matrix", worst <= 1e-12, worst, 1e-12),
    ]


def check_wiener_cov(seed: int, n_paths: int = 200_000) -> list[CheckResult]:
    rng = np.random.default_rng([seed, 3])
    grid = random_grid(rng, 10)
    lam = 1.0
    C = empirical_covariance(sample_wiener(grid, lam, seed, n_paths))
    K = gram(KernelSpec.wiener(lam), grid).entries
    err = float(np.max(np.abs(C - K)) / np.max(K))
    return [CheckResult("wiener_cov.wiener_covariance", err <= MC_RTOL, err, MC_RTOL,
                        f"{n_paths} paths, nonuniform 10-point grid")]


def check_maxent(seed: int, n_candidates: int = 1000) -> list[CheckResult]:
    rng = np.random.default_rng([seed, 4])
    worst = np.inf
    # Fischer: det R <= 1 - rho^2 for any off-diagonal rho, so the gap is at
    # least -0.5 log(1 - rho_max^2) and vanishes only for independent increments
    worst_slack = np.inf
    for n in range(2, 9):
        grid = random_grid(rng, n)
        lam = float(rng.uniform(0.1, 10))
        for k in range(n_candidates):
            cand = random_constrained_covariance(grid, lam, int(rng.integers(2**63)))
            gap = maxent_gap(cand)
            worst = min(worst, gap)
            worst_slack = min(worst_slack, gap - correlation_gap_bound(cand.increments))
    self_gap = abs(maxent_gap(constrained_covariance(uniform_grid(6), 1.0)))
    residual = 0.0
    for _ in range(100):
        g = random_grid(rng, int(rng.integers(2, 51)))
        residual = max(residual, abs(chain_rule_residual(g, float(rng.uniform(0.1, 10)))))
    return [
        CheckResult("maxent.wiener_dominates", worst >= -1e-10, worst, -1e-10,
                    f"{n_candidates} candidates per grid, n=2..8"),
        CheckResult("maxent.gap_bounded_by_correlation", worst_slack >= -1e-10, worst_slack, -1e-10,
                    "gap + 0.5 log(1 - max rho^2)"),
        CheckResult("maxent.wiener_self_gap", self_gap < 1e-10, self_gap, 1e-10),
        CheckResult("maxent.chain_rule_residual", residual < 1e-8, residual, 1e-8),
    ]


def check_warp(seed: int, n_paths: int = 200_000) -> list[CheckResult]:
    rng = np.random.default_rng([seed, 5])
    worst_identity = 0.0
    for _ in range(1000):
        t, s = rng.uniform(0, 20, size=2)
        beta, lam = rng.uniform(0.01, 5), rng.uniform(0.1, 10)
        tc = eval_kernel(KernelSpec.tc(beta, lam), t, s)
        w = eval_kernel(KernelSpec.wiener(lam), np.exp(-beta * t), np.exp(-beta * s))
        worst_identity = max(worst_identity, abs(tc - w) / abs(w))
    grid = uniform_grid(10)
    C = empirical_covariance(sample_stable_spline(grid, 1.0, 1.0, seed, n_paths))
    mc_err = _normalized_error(C, gram(KernelSpec.tc(1.0, 1.0), grid).entries)
    worst_entropy = 0.0
    for _ in range(100):
        g = random_grid(rng, int(rng.integers(2, 21)), 0.05, 0.5)
        beta = float(rng.uniform(0.1, 2.0))
        taus = np.sort(exp_transform(g, beta).taus)
        h_tc = gaussian_entropy(gram(KernelSpec.tc(beta, 1.0), g).entries)
        h_w = gaussian_entropy(gram(KernelSpec.wiener(1.0), taus).entries)
        worst_entropy = max(worst_entropy, abs(h_tc - h_w))
    return [
        CheckResult("warp.tc_is_warped_wiener", worst_identity <= 1e-14, worst_identity, 1e-14),
        CheckResult("warp.stable_spline_covariance", mc_err <= MC_RTOL, mc_err, MC_RTOL,
                    "error relative to sqrt(K_ii K_jj)"),
        CheckResult("warp.entropy_equivalence", worst_entropy <= 1e-8, worst_entropy, 1e-8),
    ]


def check_psd(seed: int, n_grids: int = 100) -> list[CheckResult]:
    rng = np.random.default_rng([seed, 6])
    worst = np.inf
    for _ in range(n_grids):
        g = random_grid(rng, int(rng.integers(1, 51)))
        for spec in (KernelSpec.tc(float(rng.uniform(0.05, 3)), float(rng.uniform(0.1, 10))),
                     KernelSpec.wiener(float(rng.uniform(0.1, 10))),
                     KernelSpec.white(float(rng.uniform(0.1, 10)))):
            K = gram(spec, g)
            trace = float(np.trace(K.entries))
            worst = min(worst, min_eigenvalue(K) / trace if trace > 0 else 0.0)
    return [CheckResult("psd.all_families", worst >= -1e-8, worst, -1e-8,
                        "min eigenvalue / trace")]


SUITES: dict[str, list[Callable[..., list[CheckResult]]]] = {
    "white_noise": [check_white_noise],
    "increments": [check_increments],
    "wiener_cov": [check_wiener_cov],
    "maxent": [check_maxent],
    "warp": [check_warp],
    "psd": [check_psd],
}
SUITES["all"] = [c for name in ("white_noise", "increments", "wiener_cov", "maxent", "warp", "psd")
                 for c in SUITES[name]]


def run_suite(name: str = "all", seed: int = 0, n_paths: int | None = None) -> list[CheckResult]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    results = []
    for check in SUITES[name]:
        kwargs = {}
        if n_paths is not None and check in (check_increments, check_wiener_cov, check_warp):
            kwargs["n_paths"] = n_paths
        results.extend(check(seed, **kwargs))
    return results


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  status  {'value':>12}  {'threshold':>10}"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {status:<6}  {r.value:>12.4g}  {r.threshold:>10.3g}")
    return "\n".join(lines)
