import math

import numpy as np
import pytest
import scipy.integrate
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from stablespline.entropy import (
    LOG_2PIE,
    SINGULAR,
    ConstrainedCovariance,
    chain_rule_residual,
    constrained_covariance,
    entropy_rate_curve,
    gaussian_entropy,
    increment_covariance,
    maxent_gap,
    random_constrained_covariance,
    random_correlation,
    white_noise_rate,
)
from stablespline.grid import exp_transform, make_grid, uniform_grid
from stablespline.kernels import KernelSpec, gram

from conftest import grids

HALF_LOG_2PIE = 1.4189385332046727


def _quadrature_entropy(var):
    pdf = scipy.stats.norm(scale=math.sqrt(var)).pdf
    val, _ = scipy.integrate.quad(lambda x: -pdf(x) * math.log(pdf(x)), -12 * math.sqrt(var),
                                  12 * math.sqrt(var), limit=200)
    return val


def test_half_log_2pie_from_quadrature():
    assert _quadrature_entropy(1.0) == pytest.approx(HALF_LOG_2PIE, abs=1e-10)
    assert 0.5 * LOG_2PIE == pytest.approx(HALF_LOG_2PIE, abs=1e-15)


def test_gaussian_entropy_examples():
    assert gaussian_entropy([[1.0]]) == pytest.approx(HALF_LOG_2PIE, abs=1e-14)
    assert gaussian_entropy(np.eye(2)) == pytest.approx(2 * HALF_LOG_2PIE, abs=1e-14)
    assert gaussian_entropy([[1.0, 1.0], [1.0, 1.0]]) == SINGULAR


def test_gaussian_entropy_matches_scipy(rng):
    for n in (1, 3, 7):
        M = rng.standard_normal((n, n))
        S = M @ M.T + 0.1 * np.eye(n)
        expected = scipy.stats.multivariate_normal(cov=S).entropy()
        assert gaussian_entropy(S) == pytest.approx(expected, rel=1e-12)


def test_gaussian_entropy_rejects_bad_input():
    with pytest.raises(ValueError):
        gaussian_entropy([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(ValueError):
        gaussian_entropy([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(ValueError):
        gaussian_entropy([[np.inf]])


def test_gaussian_entropy_singular_pivot_threshold():
    tiny = 1e-14
    assert gaussian_entropy([[1.0, 0.0], [0.0, tiny]]) == SINGULAR
    assert np.isfinite(gaussian_entropy([[1.0, 0.0], [0.0, 1e-9]]))


def test_white_noise_rate_examples():
    assert white_noise_rate(1.0) == pytest.approx(HALF_LOG_2PIE, abs=1e-15)
    assert white_noise_rate(1 / (2 * math.pi * math.e)) == pytest.approx(0.0, abs=1e-15)
    assert white_noise_rate(2.0) - white_noise_rate(1.0) == pytest.approx(0.5 * math.log(2), abs=1e-15)
    assert 0.5 * math.log(2) == pytest.approx(0.34657, abs=1e-5)
    with pytest.raises(ValueError):
        white_noise_rate(0.0)


def test_chain_rule_examples():
    assert abs(chain_rule_residual(uniform_grid(11), 1.0)) < 1e-8
    assert abs(chain_rule_residual(make_grid([0, 1, 4]), 3.0)) < 1e-8
    # one increment: 0.5 log(2 pi e lam t1) - 0.5 log(2 pi e lam) - log sqrt(t1) = 0
    assert abs(chain_rule_residual(make_grid([0, 2.7]), 0.4)) < 1e-14
    with pytest.raises(ValueError):
        chain_rule_residual(make_grid([0]), 1.0)


@settings(max_examples=100, deadline=None)
@given(grids(min_size=2, max_size=50, min_gap=0.01, max_gap=2.0), st.floats(0.1, 10.0))
def test_chain_rule_random(grid, lam):
    assert abs(chain_rule_residual(grid, lam)) < 1e-8


def test_maxent_gap_self_is_zero():
    cand = constrained_covariance(uniform_grid(4), 1.0)
    wiener = gram(KernelSpec.wiener(1.0), uniform_grid(4).times[1:]).entries
    np.testing.assert_allclose(cand.sigma, wiener, atol=1e-15)
    assert maxent_gap(cand) == 0.0


def test_maxent_gap_correlated_increments():
    R = np.array([[1.0, 0.5], [0.5, 1.0]])
    cand = constrained_covariance(uniform_grid(3), 1.0, R)
    # cumulative map has unit determinant, so the gap is -0.5 log det R
    expected = -0.5 * math.log(1 - 0.5**2)
    assert maxent_gap(cand) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(0.14384, abs=1e-5)


def test_infeasible_candidate_rejected():
    grid = uniform_grid(3)
    with pytest.raises(ValueError, match="infeasible"):
        ConstrainedCovariance(np.eye(2), grid, 1.0)
    with pytest.raises(ValueError):
        ConstrainedCovariance(np.eye(3), grid, 1.0)


def test_random_candidate_properties():
    grid = make_grid([0, 0.3, 1.0, 1.1, 2.0])
    a = random_constrained_covariance(grid, 2.0, seed=42)
    b = random_constrained_covariance(grid, 2.0, seed=42)
    assert np.array_equal(a.sigma, b.sigma)
    np.testing.assert_allclose(np.diag(a.increments), 2.0 * grid.increments, atol=1e-12)
    identity = constrained_covariance(grid, 2.0, np.eye(4))
    np.testing.assert_allclose(identity.sigma, gram(KernelSpec.wiener(2.0), grid.times[1:]).entries,
                               atol=1e-14)


def test_hadamard_dominance_sweep(rng):
    for n in range(2, 9):
        times = np.concatenate(([0], np.cumsum(rng.uniform(0.05, 2, n - 1))))
        grid = make_grid(times)
        lam = rng.uniform(0.1, 10)
        for seed in range(150):
            cand = random_constrained_covariance(grid, lam, seed)
            gap = maxent_gap(cand)
            assert gap >= -1e-10
            inc = cand.increments
            d = np.sqrt(np.diag(inc))
            R = inc / np.outer(d, d)
            # the gap is exactly the Hadamard deficit of the increment correlation
            assert gap == pytest.approx(-0.5 * np.linalg.slogdet(R)[1], abs=1e-9)


def test_unit_variance_entropy_bound(rng):
    n = 8
    bound = n * HALF_LOG_2PIE
    for _ in range(200):
        R = random_correlation(n, rng)
        assert np.allclose(np.diag(R), 1.0)
        assert gaussian_entropy(R) <= bound + 1e-10
    assert gaussian_entropy(np.eye(n)) == pytest.approx(bound, abs=1e-12)


@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_entropy_permutation_invariant(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n))
    S = M @ M.T + 0.5 * np.eye(n)
    p = rng.permutation(n)
    assert gaussian_entropy(S[np.ix_(p, p)]) == pytest.approx(gaussian_entropy(S), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(grids(min_size=2, max_size=20, min_gap=0.05, max_gap=0.5), st.floats(0.1, 2.0))
def test_tc_entropy_equals_warped_wiener_entropy(grid, beta):
    taus = np.sort(exp_transform(grid, beta).taus)
    h_tc = gaussian_entropy(gram(KernelSpec.tc(beta, 1.0), grid).entries)
    h_w = gaussian_entropy(gram(KernelSpec.wiener(1.0), taus).entries)
    assert h_tc == pytest.approx(h_w, abs=1e-8)


def test_rate_curve_white_noise_constant():
    reports = entropy_rate_curve(KernelSpec.white(1.0), uniform_grid(30))
    assert len(reports) == 30
    for r in reports:
        assert abs(r.rate - HALF_LOG_2PIE) < 1e-12
        assert r.rate == r.joint_entropy / r.n


def test_rate_curve_wiener_unit_spacing():
    reports = entropy_rate_curve(KernelSpec.wiener(1.0), uniform_grid(21, 1.0))
    assert len(reports) == 20
    for r in reports:
        assert r.rate == pytest.approx(HALF_LOG_2PIE, abs=1e-12)


def test_rate_curve_wiener_spacing_four():
    reports = entropy_rate_curve(KernelSpec.wiener(1.0), uniform_grid(16, 4.0))
    for r in reports:
        assert r.rate == pytest.approx(HALF_LOG_2PIE + math.log(2), abs=1e-12)
        assert r.reference_rate == pytest.approx(r.rate, abs=1e-12)


def test_rate_curve_wiener_converges_to_shifted_rate():
    # non-uniform prefix, then uniform Ts = 0.5: rate tends to 0.5 log(2 pi e lam Ts)
    times = np.concatenate(([0.0, 3.0, 3.01], 3.01 + 0.5 * np.arange(1, 198)))
    reports = entropy_rate_curve(KernelSpec.wiener(2.0), make_grid(times))
    target = 0.5 * math.log(2 * math.pi * math.e * 2.0 * 0.5)
    errs = [abs(r.rate - target) for r in reports]
    assert errs[-1] < errs[10] < errs[1]
    assert errs[-1] < 0.02
    for r in reports:
        assert r.rate == pytest.approx(r.reference_rate, abs=1e-9)


def test_rate_curve_tc_reference_matches():
    reports = entropy_rate_curve(KernelSpec.tc(0.3, 1.5), make_grid([0, 0.5, 0.6, 2.0, 3.0]))
    for r in reports:
        assert r.rate == pytest.approx(r.reference_rate, abs=1e-10)
    # TC carries less entropy each step as the warped spacing shrinks
    rates = [r.rate for r in reports]
    assert rates[0] == pytest.approx(white_noise_rate(1.5), abs=1e-14)


def test_rate_curve_singular_reports_minus_inf():
    reports = entropy_rate_curve(KernelSpec.tc(1.0, 1.0), uniform_grid(40, 1.0))
    assert reports[-1].rate == SINGULAR
    assert np.isfinite(reports[0].rate)


def test_rate_curve_bad_n_max():
    with pytest.raises(ValueError):
        entropy_rate_curve(KernelSpec.wiener(1.0), uniform_grid(3), n_max=5)


def test_increment_covariance_inverts_cumsum(rng):
    R = random_correlation(5, rng)
    S = np.tril(np.ones((5, 5)))
    np.testing.assert_allclose(increment_covariance(S @ R @ S.T), R, atol=1e-12)
