"""Closed-form covariance functions and Gram matrices.

Three families are supported:

* ``TC`` (first-order stable spline / tuned-correlated):
  ``k(t, s) = lam * min(exp(-beta t), exp(-beta s))``
* ``Wiener``: ``k(t, s) = lam * min(t, s)``
* ``WhiteNoise``: ``k(t, s) = sigma2`` if ``t == s`` else ``0``

The TC kernel is the Wiener kernel evaluated on exponentially warped time,
``k_TC(t, s) = k_W(exp(-beta t), exp(-beta s))``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np
import scipy.linalg

from .grid import TimeGrid

__all__ = [
    "Family",
    "KernelSpec",
    "GramMatrix",
    "eval_kernel",
    "gram",
    "min_eigenvalue",
    "is_psd",
]


class Family(str, enum.Enum):
    TC = "tc"
    WIENER = "wiener"
    WHITE = "white"


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family together with its (strictly positive) parameters.

    Prefer the :meth:`tc`, :meth:`wiener` and :meth:`white` constructors.
    """

    family: Family
    beta: float | None = None
    lam: float | None = None
    sigma2: float | None = None

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        required = {
            Family.TC: ("beta", "lam"),
            Family.WIENER: ("lam",),
            Family.WHITE: ("sigma2",),
        }[family]
        for name in ("beta", "lam", "sigma2"):
            value = getattr(self, name)
            if name in required:
                if value is None or not np.isfinite(value) or value <= 0:
                    raise ValueError(f"{family.value} kernel needs {name} > 0, got {value!r}")
                object.__setattr__(self, name, float(value))
            elif value is not None:
                raise ValueError(f"{family.value} kernel takes no {name}")

    @classmethod
    def tc(cls, beta: float, lam: float = 1.0) -> "KernelSpec":
        return cls(Family.TC, beta=beta, lam=lam)

    @classmethod
    def wiener(cls, lam: float = 1.0) -> "KernelSpec":
        return cls(Family.WIENER, lam=lam)

    @classmethod
    def white(cls, sigma2: float = 1.0) -> "KernelSpec":
        return cls(Family.WHITE, sigma2=sigma2)

    def __call__(self, t, s):
        return eval_kernel(self, t, s)


def _check_times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("kernel arguments must be finite")
    if np.any(t < 0):
        raise ValueError("kernel arguments must be non-negative")
    return t


def eval_kernel(spec: KernelSpec, t, s):
    """Evaluate ``k(t, s)``; broadcasts over array arguments."""
    t = _check_times(t)
    s = _check_times(s)
    if spec.family is Family.TC:
        out = spec.lam * np.minimum(np.exp(-spec.beta * t), np.exp(-spec.beta * s))
    elif spec.family is Family.WIENER:
        out = spec.lam * np.minimum(t, s)
    else:
        # exact equality: kernels are only evaluated at canonical grid values
        out = np.where(t == s, spec.sigma2, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Kernel evaluated at all pairs of a set of instants."""

    entries: np.ndarray
    times: np.ndarray
    kernel: KernelSpec

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return scipy.linalg.eigvalsh(self.entries)

    @cached_property
    def cholesky(self) -> np.ndarray:
        """Lower Cholesky factor; raises ``LinAlgError`` if not positive definite."""
        return np.linalg.cholesky(self.entries)


GridLike = Union[TimeGrid, np.ndarray, list, tuple]


def gram(spec: KernelSpec, grid: GridLike) -> GramMatrix:
    """Gram matrix ``K[i, j] = k(t_i, t_j)``.

    ``grid`` is normally a :class:`TimeGrid`; a raw 1-D array of
    non-negative instants (e.g. warped times) is accepted too.
    """
    times = grid.times if isinstance(grid, TimeGrid) else _check_times(grid)
    if times.ndim != 1:
        raise ValueError("gram needs a one-dimensional set of instants")
    full = eval_kernel(spec, times[:, None], times[None, :])
    full = np.atleast_2d(full)
    lower = np.tril(full)
    entries = lower + np.tril(lower, -1).T
    entries.setflags(write=False)
    frozen_times = np.array(times, dtype=float)
    frozen_times.setflags(write=False)
    return GramMatrix(entries=entries, times=frozen_times, kernel=spec)


def min_eigenvalue(K) -> float:
    """Smallest eigenvalue of a symmetric matrix (or :class:`GramMatrix`)."""
    if isinstance(K, GramMatrix):
        return float(K.eigenvalues[0])
    K = np.asarray(K, dtype=float)
    if not np.all(np.isfinite(K)):
        raise ValueError("matrix has non-finite entries")
    return float(scipy.linalg.eigvalsh(K, subset_by_index=[0, 0])[0])


def is_psd(K, rtol: float = 1e-8) -> bool:
    """``min_eigenvalue(K) >= -rtol * trace(K)``."""
    return min_eigenvalue(K) >= -rtol * float(np.trace(np.asarray(K)))
