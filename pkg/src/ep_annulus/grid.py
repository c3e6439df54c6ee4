"""Uniform (r, x3) grid on the annulus section (r0, r1) x (-1, 1).

Arrays are indexed ``f[i, j]`` with ``i`` along r and ``j`` along x3.
Derivatives are second order: central in the interior, one-sided on the
boundary rows.  At the walls ``x3 = +-1`` a field with known parity may
instead use the central stencil on its symmetric extension, which is how
the wall compatibility conditions are kept exact in the solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import OddExtensionMismatch

Z_MIN, Z_MAX = -1.0, 1.0


@dataclass(frozen=True)
class Grid2D:
    nr: int
    nz: int
    r0: float
    r1: float

    def __post_init__(self):
        if self.nr < 9 or self.nz < 9:
            raise ValueError("Grid2D needs at least 9 nodes per direction")
        if not 0 < self.r0 < self.r1:
            raise ValueError("need 0 < r0 < r1")

    @property
    def r(self) -> np.ndarray:
        return np.linspace(self.r0, self.r1, self.nr)

    @property
    def z(self) -> np.ndarray:
        return np.linspace(Z_MIN, Z_MAX, self.nz)

    @property
    def hr(self) -> float:
        return (self.r1 - self.r0) / (self.nr - 1)

    @property
    def hz(self) -> float:
        return (Z_MAX - Z_MIN) / (self.nz - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nr, self.nz)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.r, self.z, indexing="ij")

    def refine(self) -> "Grid2D":
        return Grid2D(2 * self.nr - 1, 2 * self.nz - 1, self.r0, self.r1)

    def trapezoid_weights(self) -> np.ndarray:
        wr = np.full(self.nr, self.hr)
        wr[[0, -1]] *= 0.5
        wz = np.full(self.nz, self.hz)
        wz[[0, -1]] *= 0.5
        return np.outer(wr, wz)


def _diff(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    f = np.moveaxis(np.asarray(f, dtype=float), axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
    out[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    out[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    return np.moveaxis(out, 0, axis)


def _diff2(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    f = np.moveaxis(np.asarray(f, dtype=float), axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
    out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
    out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
    return np.moveaxis(out, 0, axis)


def d_r(f: np.ndarray, grid: Grid2D) -> np.ndarray:
    return _diff(f, grid.hr, axis=0)


def d_rr(f: np.ndarray, grid: Grid2D) -> np.ndarray:
    return _diff2(f, grid.hr, axis=0)


def d_z(f: np.ndarray, grid: Grid2D, parity: Optional[str] = None) -> np.ndarray:
    """x3-derivative; ``parity`` selects the wall closure ('even', 'odd' or None)."""
    out = _diff(f, grid.hz, axis=1)
    if parity == "even":
        out[:, 0] = 0.0
        out[:, -1] = 0.0
    elif parity == "odd":
        out[:, 0] = f[:, 1] / grid.hz
        out[:, -1] = -f[:, -2] / grid.hz
    elif parity is not None:
        raise ValueError(f"unknown parity {parity!r}")
    return out


def d_zz(f: np.ndarray, grid: Grid2D, parity: Optional[str] = None) -> np.ndarray:
    out = _diff2(f, grid.hz, axis=1)
    h2 = grid.hz**2
    if parity == "even":
        out[:, 0] = 2 * (f[:, 1] - f[:, 0]) / h2
        out[:, -1] = 2 * (f[:, -2] - f[:, -1]) / h2
    elif parity == "odd":
        out[:, 0] = -2 * f[:, 0] / h2
        out[:, -1] = -2 * f[:, -1] / h2
    elif parity is not None:
        raise ValueError(f"unknown parity {parity!r}")
    return out


def extend_symmetric(f: np.ndarray, parity: str, tol: float = 1e-10) -> np.ndarray:
    """Reflect ``f`` across both walls onto x3 in [-3, 3].

    Even parity uses ``f(r, 2 - x3)`` above the top wall and ``f(r, -2 - x3)``
    below the bottom one; odd parity negates the reflected values and
    requires ``f`` to vanish on the walls (relative to ``max(1, |f|_inf)``).
    The result has ``3 * nz - 2`` columns.
    """
    f = np.asarray(f, dtype=float)
    if parity == "even":
        sign = 1.0
    elif parity == "odd":
        sign = -1.0
        scale = max(1.0, float(np.max(np.abs(f))))
        wall = float(max(np.max(np.abs(f[:, 0])), np.max(np.abs(f[:, -1]))))
        if wall > tol * scale:
            raise OddExtensionMismatch(f"wall values up to {wall:.3g} for an odd extension")
    else:
        raise ValueError(f"unknown parity {parity!r}")
    return np.concatenate([sign * f[:, :0:-1], f, sign * f[:, -2::-1]], axis=1)


def extended_z(grid: Grid2D) -> np.ndarray:
    return np.linspace(-3.0, 3.0, 3 * grid.nz - 2)


class Norms(NamedTuple):
    sup: float
    l2: float
    c1: float


def norms(f: np.ndarray, grid: Grid2D, r_weight: bool = False) -> Norms:
    """Sup, trapezoid L2 (optionally r-weighted) and discrete C1 norms."""
    f = np.asarray(f, dtype=float)
    w = grid.trapezoid_weights()
    if r_weight:
        w = w * grid.r[:, None]
    sup = float(np.max(np.abs(f)))
    l2 = float(np.sqrt(np.sum(w * f * f)))
    c1 = sup + float(np.max(np.abs(d_r(f, grid)))) + float(np.max(np.abs(d_z(f, grid))))
    return Norms(sup, l2, c1)


def bilinear(f: np.ndarray, grid: Grid2D, r_pts: np.ndarray, z_pts: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of node values at arbitrary points (clamped to the box)."""
    s = np.clip((np.asarray(r_pts) - grid.r0) / grid.hr, 0.0, grid.nr - 1.0)
    t = np.clip((np.asarray(z_pts) - Z_MIN) / grid.hz, 0.0, grid.nz - 1.0)
    i = np.minimum(s.astype(int), grid.nr - 2)
    j = np.minimum(t.astype(int), grid.nz - 2)
    a = s - i
    b = t - j
    return (
        (1 - a) * (1 - b) * f[i, j]
        + a * (1 - b) * f[i + 1, j]
        + (1 - a) * b * f[i, j + 1]
        + a * b * f[i + 1, j + 1]
    )
