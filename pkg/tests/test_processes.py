import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stablespline.grid import make_grid, uniform_grid
from stablespline.kernels import KernelSpec, gram
from stablespline.processes import (
    BLOCK_SIZE,
    ProcessPaths,
    empirical_covariance,
    finite_difference,
    increment_matrix,
    sample_stable_spline,
    sample_white,
    sample_wiener,
    standard_normals,
    wiener_from_innovations,
)

from conftest import grids

N = 100_000
# Var of a sample variance is 2 sigma^4 / N; 3% sits at about 7 standard errors.
MC_RTOL = 0.03


def test_white_variance_and_independence():
    grid = make_grid([0, 0.3, 1.0, 1.2, 4.0])
    paths = sample_white(grid, 1.0, seed=3, n_paths=N)
    C = empirical_covariance(paths)
    np.testing.assert_allclose(np.diag(C), 1.0, rtol=MC_RTOL)
    off = C[~np.eye(5, dtype=bool)]
    assert np.max(np.abs(off)) < 0.02
    np.testing.assert_allclose(C, np.eye(5), atol=MC_RTOL)


def test_white_is_deterministic():
    grid = uniform_grid(6)
    a = sample_white(grid, 1.0, seed=11, n_paths=50)
    b = sample_white(grid, 1.0, seed=11, n_paths=50)
    assert np.array_equal(a.values, b.values)
    c = sample_white(grid, 1.0, seed=12, n_paths=50)
    assert not np.array_equal(a.values, c.values)


def test_paths_do_not_depend_on_request_size_or_workers():
    n = 2 * BLOCK_SIZE + 17
    big = standard_normals(5, n, 4, workers=1)
    threaded = standard_normals(5, n, 4, workers=4)
    small = standard_normals(5, 10, 4)
    assert np.array_equal(big, threaded)
    assert np.array_equal(big[:10], small)


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_seed_must_be_u64(seed):
    with pytest.raises(ValueError):
        standard_normals(seed, 1, 1)


@pytest.mark.parametrize("sampler", [sample_white, sample_wiener])
def test_rejects_nonpositive_lambda(sampler):
    with pytest.raises(ValueError):
        sampler(uniform_grid(3), 0.0, 0, 1)


def test_wiener_variance_at_one():
    paths = sample_wiener(make_grid([0, 1]), 1.0, seed=1, n_paths=N)
    assert paths.values[:, 1].var(ddof=1) == pytest.approx(1.0, rel=MC_RTOL)


def test_wiener_origin_is_pinned():
    paths = sample_wiener(make_grid([0, 0.1, 0.5]), 3.0, seed=9, n_paths=1000)
    assert np.all(paths.values[:, 0] == 0.0)


def test_wiener_covariance_small_grid():
    paths = sample_wiener(make_grid([0, 0.5, 1.0]), 2.0, seed=4, n_paths=200_000)
    C = empirical_covariance(paths)[1:, 1:]
    np.testing.assert_allclose(C, [[1.0, 1.0], [1.0, 2.0]], rtol=MC_RTOL)


def test_wiener_empirical_covariance_on_integer_grid():
    paths = sample_wiener(make_grid([0, 1, 2]), 1.0, seed=2, n_paths=N)
    C = empirical_covariance(paths)
    assert np.all(C[0] == 0) and np.all(C[:, 0] == 0)
    np.testing.assert_allclose(C[1:, 1:], [[1, 1], [1, 2]], rtol=MC_RTOL)


def test_rescaled_increments_are_white():
    grid = make_grid([0, 0.2, 0.25, 1.0, 2.5, 2.6])
    lam = 0.7
    paths = sample_wiener(grid, lam, seed=21, n_paths=N)
    w = finite_difference(paths).values / np.sqrt(grid.increments)
    np.testing.assert_allclose(w.var(axis=0, ddof=1), lam, rtol=MC_RTOL)
    R = np.corrcoef(w, rowvar=False)
    assert np.max(np.abs(R - np.eye(R.shape[0]))) < 4 / math.sqrt(N)


def test_disjoint_increments_uncorrelated():
    grid = make_grid([0, 1, 1.5, 3, 3.1])
    d = finite_difference(sample_wiener(grid, 1.0, seed=8, n_paths=N)).values
    # (t0,t1) vs (t2,t3) and (t1,t2) vs (t3,t4)
    for a, b in ((0, 2), (1, 3)):
        r = np.corrcoef(d[:, a], d[:, b])[0, 1]
        assert abs(r) < 4 / math.sqrt(N)


def test_finite_difference_examples():
    g = make_grid([0, 1, 2])
    p = ProcessPaths(np.array([[0.0, 1.0, 3.0], [2.0, 2.0, 2.0]]), g, 0, "white")
    d = finite_difference(p)
    np.testing.assert_array_equal(d.values, [[1.0, 2.0], [0.0, 0.0]])
    assert d.grid.times.tolist() == [0.0, 1.0]


def test_finite_difference_variance_matches_increment():
    grid = make_grid([0, 0.25, 0.75])
    d = finite_difference(sample_wiener(grid, 1.0, seed=5, n_paths=N))
    np.testing.assert_allclose(d.values.var(axis=0, ddof=1), [0.25, 0.5], rtol=MC_RTOL)


def test_finite_difference_needs_two_points():
    p = sample_white(make_grid([0]), 1.0, 0, 3)
    with pytest.raises(ValueError):
        finite_difference(p)


def test_increment_matrix_examples():
    A = increment_matrix(make_grid([0, 1, 4]))
    np.testing.assert_allclose(A.entries, [[1, 0], [1, math.sqrt(3)]], rtol=1e-15)
    assert A.log_abs_det == pytest.approx(math.log(math.sqrt(3)), rel=1e-14)
    assert A.log_abs_det == pytest.approx(0.54931, abs=1e-5)
    U = increment_matrix(uniform_grid(6))
    np.testing.assert_array_equal(U.entries, np.tril(np.ones((5, 5))))
    assert U.log_abs_det == 0.0
    np.testing.assert_array_equal(increment_matrix(make_grid([0, 0.25])).entries, [[0.5]])


def test_increment_matrix_determinant_matches_slogdet(rng):
    times = np.concatenate(([0], np.cumsum(rng.uniform(0.1, 3, 12))))
    A = increment_matrix(make_grid(times))
    sign, logdet = np.linalg.slogdet(A.entries)
    assert sign == 1.0
    assert A.log_abs_det == pytest.approx(logdet, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(grids(min_size=2, max_size=50), st.integers(0, 2**64 - 1), st.floats(0.1, 10))
def test_cumulative_route_equals_matrix_route(grid, seed, lam):
    white = sample_white(grid, lam, seed, 8).values
    direct = sample_wiener(grid, lam, seed, 8).values
    via_A = white[:, 1:] @ increment_matrix(grid).entries.T
    np.testing.assert_allclose(direct[:, 1:], via_A, rtol=0, atol=1e-12 * max(1.0, np.abs(via_A).max()))


def test_long_grid_chunked_cumsum_matches_matrix():
    n = 12_345
    times = np.arange(n, dtype=float) * 0.01
    h = np.random.default_rng(0).standard_normal((2, n - 1))
    g = wiener_from_innovations(times, h)
    ref = np.cumsum(h * 0.1, axis=1)
    np.testing.assert_allclose(g[:, 1:], ref, atol=1e-10)
    assert np.all(g[:, 0] == 0)


def test_stable_spline_matches_tc_gram():
    grid = make_grid([0, 1, 2])
    paths = sample_stable_spline(grid, 1.0, 1.0, seed=6, n_paths=200_000)
    C = empirical_covariance(paths)
    K = gram(KernelSpec.tc(1.0, 1.0), grid).entries
    scale = np.sqrt(np.outer(np.diag(K), np.diag(K)))
    assert np.max(np.abs(C - K) / scale) < MC_RTOL
    assert C[0, 0] == pytest.approx(1.0, rel=MC_RTOL)


def test_stable_spline_nonuniform_grid_and_lambda():
    grid = make_grid([0, 0.1, 0.7, 0.8, 3.0])
    paths = sample_stable_spline(grid, 0.6, 2.5, seed=10, n_paths=200_000)
    K = gram(KernelSpec.tc(0.6, 2.5), grid).entries
    C = empirical_covariance(paths)
    scale = np.sqrt(np.outer(np.diag(K), np.diag(K)))
    assert np.max(np.abs(C - K) / scale) < MC_RTOL
    assert paths.transformed is not None and paths.transformed.beta == 0.6


def test_stable_spline_deterministic():
    grid = uniform_grid(5)
    a = sample_stable_spline(grid, 0.5, 1.0, seed=1, n_paths=100)
    b = sample_stable_spline(grid, 0.5, 1.0, seed=1, n_paths=100)
    assert np.array_equal(a.values, b.values)


def test_empirical_covariance_examples():
    g = make_grid([0, 1])
    p = ProcessPaths(np.array([[2.0, 3.0], [2.0, 3.0]]), g, 0, "white")
    np.testing.assert_array_equal(empirical_covariance(p), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        empirical_covariance(ProcessPaths(np.zeros((1, 2)), g, 0, "white"))


def test_process_paths_validation():
    g = make_grid([0, 1])
    with pytest.raises(ValueError):
        ProcessPaths(np.array([[1.0, 2.0]]), g, 0, "wiener")
    with pytest.raises(ValueError):
        ProcessPaths(np.array([[0.0, np.nan]]), g, 0, "white")
    with pytest.raises(ValueError):
        ProcessPaths(np.zeros((2, 3)), g, 0, "white")
