"""Uniform periodic grids.

Convention everywhere: n points x_m = m * L / n for m = 0..n-1, so x=0 is a
grid node and x=L is identified with it.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError


def grid_1d(n: int, length: float = 1.0) -> np.ndarray:
    if n < 1:
        raise InvalidArgumentError(f"grid size must be >= 1, got {n}")
    if length <= 0:
        raise InvalidArgumentError(f"domain length must be > 0, got {length}")
    return np.arange(n) * (length / n)


def grid_2d(
    nx: int, ny: int, lx: float = 1.0, ly: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """Axis coordinate arrays; fields are indexed [ix, iy]."""
    return grid_1d(nx, lx), grid_1d(ny, ly)
