"""Samplers for discrete-time white noise, Wiener and stable-spline processes.

Randomness comes from a counter-based generator (Philox).  Paths are grouped
into fixed blocks of :data:`BLOCK_SIZE` and block ``b`` is drawn from the
Philox stream keyed by ``(seed, b)``.  A given path therefore receives the same
innovations no matter how many paths are requested or how many workers draw
the blocks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import TimeGrid, TransformedGrid, exp_transform, make_grid

__all__ = [
    "BLOCK_SIZE",
    "ProcessPaths",
    "IncrementMatrix",
    "standard_normals",
    "sample_white",
    "sample_wiener",
    "sample_stable_spline",
    "wiener_from_innovations",
    "finite_difference",
    "increment_matrix",
    "empirical_covariance",
]

BLOCK_SIZE = 4096
_PAIRWISE_THRESHOLD = 10_000
_CHUNK = 1024
_U64 = (1 << 64) - 1


@dataclass(frozen=True, eq=False)
class ProcessPaths:
    """Sampled trajectories, one row per path and one column per instant.

    For ``stable_spline`` paths ``values[:, i]`` is ``f(t_i) = g(tau_i)``; the
    pinned origin of the underlying Wiener process sits at ``tau = 0``, which
    corresponds to ``t = inf`` and is not stored.
    """

    values: np.ndarray
    grid: TimeGrid
    seed: int
    process_tag: str
    transformed: Optional[TransformedGrid] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(self.grid):
            raise ValueError("values must be (n_paths, n_points) matching the grid")
        if not np.all(np.isfinite(values)):
            raise ValueError("process values must be finite")
        if self.process_tag == "wiener" and np.any(values[:, 0] != 0.0):
            raise ValueError("Wiener paths must vanish at the origin")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def n_points(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class IncrementMatrix:
    """Lower-triangular ``A`` with ``g(t_1..t_n) = A @ w(t_1..t_n)``.

    Column ``j`` holds ``sqrt(t_{j+1} - t_j)`` on and below the diagonal.
    """

    entries: np.ndarray
    grid: TimeGrid

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    @property
    def log_abs_det(self) -> float:
        """``log|A| = sum_i log sqrt(t_i - t_{i-1})``."""
        return float(0.5 * np.sum(np.log(self.grid.increments)))


def _check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= _U64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return seed


def _block(seed: int, block: int, rows: int, cols: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=seed | (block << 64)))
    return gen.standard_normal((rows, cols))


def standard_normals(seed: int, n_paths: int, n_cols: int, workers: int = 1) -> np.ndarray:
    """``(n_paths, n_cols)`` i.i.d. standard normals from the blocked stream."""
    seed = _check_seed(seed)
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    n_blocks = -(-n_paths // BLOCK_SIZE)
    out = np.empty((n_paths, n_cols))

    def fill(b):
        lo = b * BLOCK_SIZE
        hi = min(lo + BLOCK_SIZE, n_paths)
        out[lo:hi] = _block(seed, b, hi - lo, n_cols)

    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, range(n_blocks)))
    else:
        for b in range(n_blocks):
            fill(b)
    return out


def _cumsum(x: np.ndarray) -> np.ndarray:
    """Row-wise running sum; chunked (two-level) for long rows."""
    n = x.shape[1]
    if n <= _PAIRWISE_THRESHOLD:
        return np.cumsum(x, axis=1)
    pad = (-n) % _CHUNK
    xp = np.pad(x, ((0, 0), (0, pad))).reshape(x.shape[0], -1, _CHUNK)
    inner = np.cumsum(xp, axis=2)
    offsets = np.cumsum(inner[:, :, -1], axis=1)
    inner[:, 1:, :] += offsets[:, :-1, None]
    return inner.reshape(x.shape[0], -1)[:, :n]


def _check_positive(name, value):
    if not (np.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


def sample_white(grid: TimeGrid, lam: float, seed: int = 0, n_paths: int = 1,
                 workers: int = 1) -> ProcessPaths:
    """I.i.d. ``N(0, lam)`` draws at every grid point."""
    _check_positive("lambda", lam)
    h = np.sqrt(lam) * standard_normals(seed, n_paths, len(grid), workers)
    return ProcessPaths(h, grid, int(seed), "white")


def wiener_from_innovations(times: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Cumulative construction ``g(t_n) = sum_{i<=n} h_i sqrt(t_i - t_{i-1})``.

    ``times`` starts at the origin; ``h`` has one column per increment
    (``len(times) - 1``).  Returns paths with ``len(times)`` columns, the first
    identically zero.
    """
    steps = h * np.sqrt(np.diff(times))
    g = np.zeros((h.shape[0], times.size))
    g[:, 1:] = _cumsum(steps)
    return g


def sample_wiener(grid: TimeGrid, lam: float, seed: int = 0, n_paths: int = 1,
                  workers: int = 1) -> ProcessPaths:
    """Discrete-time Wiener paths built from the white noise of :func:`sample_white`.

    The draw at ``t_0`` is unused; ``g(t_0) = 0`` on every path.
    """
    h = sample_white(grid, lam, seed, n_paths, workers).values
    g = wiener_from_innovations(grid.times, h[:, 1:])
    return ProcessPaths(g, grid, int(seed), "wiener")


def sample_stable_spline(grid: TimeGrid, beta: float, lam: float, seed: int = 0,
                         n_paths: int = 1, workers: int = 1) -> ProcessPaths:
    """Paths of ``f(t) = g(exp(-beta t))`` with ``g`` a Wiener process.

    The warped instants are sorted ascending and prefixed with the origin
    ``tau = 0``; the Wiener process is built on that set and read back in the
    original order.  Covariance: ``lam * min(exp(-beta t), exp(-beta s))``.
    """
    _check_positive("lambda", lam)
    warped = exp_transform(grid, beta)
    taus, order = warped.ascending()
    h = sample_white(grid, lam, seed, n_paths, workers).values
    g = wiener_from_innovations(np.concatenate(([0.0], taus)), h)
    f = np.empty((n_paths, len(grid)))
    f[:, order] = g[:, 1:]
    return ProcessPaths(f, grid, int(seed), "stable_spline", transformed=warped)


def finite_difference(paths: ProcessPaths) -> ProcessPaths:
    """``Delta[f](t_i) = f(t_{i+1}) - f(t_i)`` for ``i = 0..n-2``."""
    if paths.n_points < 2:
        raise ValueError("finite difference needs at least two grid points")
    diff = np.diff(paths.values, axis=1)
    grid = make_grid(paths.grid.times[:-1])
    return ProcessPaths(diff, grid, paths.seed, "increment")


def increment_matrix(grid: TimeGrid) -> IncrementMatrix:
    """Lower-triangular map from rescaled increments to levels ``g(t_1..t_n)``."""
    if len(grid) < 2:
        raise ValueError("increment matrix needs at least two grid points")
    root = np.sqrt(grid.increments)
    A = np.tril(np.broadcast_to(root, (root.size, root.size)))
    A.setflags(write=False)
    return IncrementMatrix(A, grid)


def empirical_covariance(paths) -> np.ndarray:
    """Unbiased sample covariance across paths, one entry per grid-point pair."""
    values = paths.values if isinstance(paths, ProcessPaths) else np.asarray(paths, dtype=float)
    if values.shape[0] < 2:
        raise ValueError("empirical covariance needs at least two paths")
    return np.atleast_2d(np.cov(values, rowvar=False))
