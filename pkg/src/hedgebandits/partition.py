"""Uniform hypercube partitions of [0,1]^d and the granularity schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Partition",
    "CellId",
    "cell_of",
    "cells_of",
    "partitioning_parameter",
    "doubling_schedule",
]


@dataclass(frozen=True)
class Partition:
    """A grid of m^dim identical hypercubes covering [0,1]^dim."""

    dim: int
    m: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")

    @property
    def cell_count(self) -> int:
        return self.m**self.dim


@dataclass(frozen=True)
class CellId:
    """Grid coordinates of one cell plus its row-major flat encoding."""

    indices: tuple[int, ...]
    flat: int


def cell_of(x, part: Partition) -> CellId:
    """Locate the cell of ``part`` containing point ``x``.

    Cells are half-open boxes [k/m, (k+1)/m) along every axis, except the
    last cell on each axis, which is closed so that coordinates equal to 1
    still map to a cell. Raises ValueError for coordinates outside [0,1].
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != part.dim:
        raise ValueError(f"expected a point of dimension {part.dim}, got shape {x.shape}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError(f"point outside [0,1]^{part.dim}: {x!r}")
    m = part.m
    idx = np.minimum(np.floor(x * m).astype(int), m - 1)
    indices = tuple(int(k) for k in idx)
    flat = 0
    for k in indices:
        flat = flat * m + k
    return CellId(indices=indices, flat=flat)


def cells_of(points, part: Partition) -> np.ndarray:
    """Flat cell ids for a batch of points, same rule as :func:`cell_of`."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[1] != part.dim:
        raise ValueError(f"expected points of dimension {part.dim}, got shape {pts.shape}")
    if np.any(pts < 0.0) or np.any(pts > 1.0):
        raise ValueError(f"points outside [0,1]^{part.dim}")
    m = part.m
    idx = np.minimum((pts * m).astype(int), m - 1)
    return np.ravel_multi_index(idx.T, (m,) * part.dim)


def partitioning_parameter(T: int, alpha: float, d: int, cap: int | None = None) -> int:
    """Cells per axis balancing approximation and estimation error.

    Returns ceil(T^(1/(2*alpha+d))), clipped to ``cap`` when a memory bound
    is given. Robust to floating-point error at exact integer powers.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if cap is not None and cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    k = 2.0 * alpha + d
    m = math.ceil(T ** (1.0 / k))
    # ceil of a float can overshoot when T^(1/k) is an exact integer
    if m > 1 and (m - 1) ** k >= T:
        m -= 1
    if cap is not None:
        m = min(m, cap)
    return m


def doubling_schedule(T_hat: int, t: int) -> tuple[int, int, int]:
    """Map a global step onto the doubling-trick phase structure.

    Phase j covers steps ((2^(j-1)-1)*T_hat, (2^j-1)*T_hat] and has horizon
    2^(j-1)*T_hat. Returns (phase, step_in_phase, phase_horizon); a learner
    run this way restarts at each phase boundary with its granularity
    recomputed from the phase horizon.
    """
    if T_hat < 1:
        raise ValueError(f"T_hat must be >= 1, got {T_hat}")
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    phase = 1
    start = 0  # steps completed before this phase
    horizon = T_hat
    while t > start + horizon:
        start += horizon
        horizon *= 2
        phase += 1
    return phase, t - start, horizon
