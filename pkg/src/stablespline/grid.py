"""Ordered sampling instants and the exponential time warp.

A :class:`TimeGrid` is a finite prefix of an ordered index set
``t_0 = 0 < t_1 < t_2 < ...``.  Spacing need not be uniform.  The
exponential warp ``tau = exp(-beta * t)`` maps such a grid onto a strictly
decreasing set of points in ``(0, 1]``; sampling a Wiener process at those
points yields the stable-spline (TC) process.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "DUPLICATE_TOL",
    "TimeGrid",
    "TransformedGrid",
    "make_grid",
    "uniform_grid",
    "exp_transform",
]

#: Gaps at or below this (absolute) value are rejected as duplicate instants.
DUPLICATE_TOL = 1e-12


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Validated, immutable grid of sample instants.

    Build it with :func:`make_grid`; the constructor re-validates, so a
    ``TimeGrid`` can never hold an invalid sequence.
    """

    times: np.ndarray
    min_spacing: float = field(init=False)

    def __post_init__(self):
        times = _frozen(self.times)
        if times.ndim != 1 or times.size == 0:
            raise ValueError("grid needs a nonempty one-dimensional sequence of times")
        if not np.all(np.isfinite(times)):
            raise ValueError("grid times must be finite")
        if times[0] != 0.0:
            raise ValueError(f"grid must start at the origin t_0 = 0, got {times[0]!r}")
        gaps = np.diff(times)
        if np.any(gaps <= DUPLICATE_TOL):
            i = int(np.argmax(gaps <= DUPLICATE_TOL))
            raise ValueError(
                f"grid times must be strictly increasing; "
                f"t[{i}]={times[i]!r}, t[{i + 1}]={times[i + 1]!r}"
            )
        object.__setattr__(self, "times", times)
        # a single-point grid has no gaps; its spacing is unconstrained
        object.__setattr__(self, "min_spacing", float(gaps.min()) if gaps.size else np.inf)

    def __len__(self) -> int:
        return self.times.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeGrid):
            return NotImplemented
        return np.array_equal(self.times, other.times)

    def __hash__(self) -> int:
        return hash(self.times.tobytes())

    @property
    def increments(self) -> np.ndarray:
        """Gaps ``t_{i+1} - t_i``, length ``n - 1``."""
        return np.diff(self.times)

    @property
    def is_uniform(self) -> bool:
        gaps = self.increments
        return gaps.size == 0 or bool(np.allclose(gaps, gaps[0], rtol=1e-9, atol=0.0))


@dataclass(frozen=True, eq=False)
class TransformedGrid:
    """Grid warped by ``tau = exp(-beta * t)``; ``taus`` decrease from 1."""

    taus: np.ndarray
    source: TimeGrid
    beta: float

    def __len__(self) -> int:
        return self.taus.size

    @property
    def source_times(self) -> np.ndarray:
        return self.source.times

    def ascending(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(sorted_taus, order)`` with ``taus[order] == sorted_taus``."""
        order = np.argsort(self.taus, kind="stable")
        return self.taus[order], order


def make_grid(times: Sequence[float]) -> TimeGrid:
    """Validate ``times`` and wrap them in a :class:`TimeGrid`.

    Raises
    ------
    ValueError
        If the sequence is empty, does not start at 0, contains non-finite
        values, or is not strictly increasing.
    """
    return TimeGrid(np.asarray(times, dtype=float))


def uniform_grid(n: int, spacing: float = 1.0) -> TimeGrid:
    """``n`` equally spaced instants ``0, Ts, ..., (n-1) Ts``."""
    if n < 1:
        raise ValueError("uniform grid needs n >= 1")
    if not (np.isfinite(spacing) and spacing > 0):
        raise ValueError("uniform grid spacing must be positive and finite")
    return TimeGrid(spacing * np.arange(n, dtype=float))


def exp_transform(grid: TimeGrid, beta: float) -> TransformedGrid:
    """Warp a grid onto ``(0, 1]`` by ``tau_i = exp(-beta * t_i)``.

    The warp is order reversing, and ``tau_0 = 1`` exactly since ``t_0 = 0``.
    """
    if not (np.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be positive and finite, got {beta!r}")
    taus = _frozen(np.exp(-beta * grid.times))
    if taus[-1] <= 0.0 or np.any(np.diff(taus) >= 0.0):
        raise ValueError(
            "exp(-beta * t) underflows or loses strict ordering on this grid; "
            "reduce beta or the grid horizon"
        )
    return TransformedGrid(taus=taus, source=grid, beta=float(beta))
