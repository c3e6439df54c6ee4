"""Transported quantities of the axisymmetric scheme and the nonlinear sources.

Given the previous iterate, ``r W2``, ``W4`` and ``W5`` are constant along
the curves ``dx3/dr = W3# / (U1bar + W1#)``.  Every node is traced back to
the inner cylinder, where the inflow data is read off.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .boundary import BoundaryPerturbation
from .errors import DegenerateRadialVelocity, VacuumState
from .grid import Z_MAX, Z_MIN, Grid2D, bilinear, d_z
from .section import AxisymBackground, DeviationField
from .thermo import ENTHALPY_FLOOR, bernoulli_density, enthalpy_argument

VELOCITY_FLOOR = 1e-12
INNER_SUBSTEPS = 4


@dataclass(frozen=True)
class CharacteristicFoot:
    r: np.ndarray
    z: np.ndarray
    z0: np.ndarray
    valid: np.ndarray
    path: Optional[list[tuple[np.ndarray, np.ndarray]]] = None


def _slope_field(U1_total: np.ndarray, W3_sharp: np.ndarray) -> np.ndarray:
    if np.min(U1_total) < VELOCITY_FLOOR:
        raise DegenerateRadialVelocity(f"radial velocity reaches {float(np.min(U1_total)):.3g}")
    return W3_sharp / U1_total


def _rk4_back(slope, grid, r, z, step):
    """One RK4 step of ``dz/dr = slope`` from r to r - step (vector step)."""

    def f(rr, zz):
        return bilinear(slope, grid, rr, np.clip(zz, Z_MIN, Z_MAX))

    k1 = f(r, z)
    k2 = f(r - 0.5 * step, z - 0.5 * step * k1)
    k3 = f(r - 0.5 * step, z - 0.5 * step * k2)
    k4 = f(r - step, z - step * k3)
    return np.clip(z - step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), Z_MIN, Z_MAX)


def trace_characteristic(
    U1_total: np.ndarray,
    W3_sharp: np.ndarray,
    grid: Grid2D,
    r_start,
    z_start,
    record: bool = False,
) -> CharacteristicFoot:
    """Trace ``dx3/dr = W3# / U1`` backwards from the start points to ``r = r0``.

    Steps land on the grid radii; the last cell next to ``r0`` is crossed in
    ``INNER_SUBSTEPS`` substeps.  Paths are clamped to the wall interval.
    """
    slope = _slope_field(U1_total, W3_sharp)
    r = np.array(r_start, dtype=float, ndmin=1)
    z = np.clip(np.array(z_start, dtype=float, ndmin=1), Z_MIN, Z_MAX)
    r, z = np.broadcast_arrays(r, z)
    r, z = r.copy(), z.copy()
    path = [(r.copy(), z.copy())] if record else None
    h = grid.hr
    tiny = 1e-9 * h
    while True:
        active = r > grid.r0 + tiny
        if not np.any(active):
            break
        ra, za = r[active], z[active]
        # next grid radius strictly below the current position
        k = np.ceil((ra - grid.r0) / h - 1e-9) - 1
        target = grid.r0 + np.maximum(k, 0) * h
        step = ra - target
        inner = k <= 0
        znew = np.empty_like(za)
        outer = ~inner
        if np.any(outer):
            znew[outer] = _rk4_back(slope, grid, ra[outer], za[outer], step[outer])
        if np.any(inner):
            ri, zi, si = ra[inner], za[inner], step[inner] / INNER_SUBSTEPS
            for _ in range(INNER_SUBSTEPS):
                zi = _rk4_back(slope, grid, ri, zi, si)
                ri = ri - si
            znew[inner] = zi
        r[active] = target
        z[active] = znew
        if record:
            path.append((r.copy(), z.copy()))
    r_out = np.array(r_start, dtype=float, ndmin=1) * np.ones_like(z)
    z_out = np.array(z_start, dtype=float, ndmin=1) * np.ones_like(z)
    return CharacteristicFoot(r_out, z_out, z, np.isfinite(z), path)


def solve_transport(
    W1_sharp: np.ndarray,
    W3_sharp: np.ndarray,
    bg: AxisymBackground,
    boundary: BoundaryPerturbation,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(W2, W4, W5)`` from the inflow data carried along the traced curves."""
    grid = bg.grid
    R, Z = grid.mesh()
    U1 = bg.col("u1") + W1_sharp
    foot = trace_characteristic(U1, W3_sharp, grid, R.ravel(), Z.ravel())
    z0 = foot.z0.reshape(grid.shape)
    eps = boundary.eps
    W2 = grid.r0 * eps * boundary.u2_en(z0) / R
    W4 = eps * boundary.a_en(z0)
    W5 = eps * boundary.k_en(z0)
    return W2, W4, W5


class GTerms(NamedTuple):
    G1: np.ndarray
    G2: np.ndarray
    G3: np.ndarray
    G4: np.ndarray


def perturbed_density(W_sharp: DeviationField, W2, W4, W5, bg: AxisymBackground) -> np.ndarray:
    """Density of the mixed state used by the source terms."""
    u1 = bg.col("u1") + W_sharp.W1
    u2 = bg.col("u2") + W2
    speed_sq = u1**2 + u2**2 + W_sharp.W3**2
    K = bg.k0 + W5
    Phi = bg.col("phi") + W_sharp.W6
    arg = enthalpy_argument(K, Phi, speed_sq)
    if np.min(arg) <= ENTHALPY_FLOOR:
        raise VacuumState(f"K + Phi - |U|^2/2 reaches {float(np.min(arg)):.3g}")
    return bernoulli_density(bg.a0 + W4, K, Phi, speed_sq, bg.gamma)


def eval_g_terms(
    W_sharp: DeviationField,
    W2: np.ndarray,
    W4: np.ndarray,
    W5: np.ndarray,
    bg: AxisymBackground,
    boundary: BoundaryPerturbation,
) -> GTerms:
    grid = bg.grid
    g = bg.gamma
    a0 = bg.a0
    rho, u1, u2, c_sq = bg.col("rho"), bg.col("u1"), bg.col("u2"), bg.col("c_sq")
    U1 = u1 + W_sharp.W1
    if np.min(U1) < VELOCITY_FLOOR:
        raise DegenerateRadialVelocity(f"radial velocity reaches {float(np.min(U1)):.3g}")
    H = perturbed_density(W_sharp, W2, W4, W5, bg)
    dH = H - rho
    # H - Hbar minus its linearization: quadratic in the deviations
    quad = (
        dH
        + rho / ((g - 1) * a0) * W4
        - rho / c_sq * W5
        - rho / c_sq * W_sharp.W6
        + rho * u1 / c_sq * W_sharp.W1
        + rho * u2 / c_sq * W2
    )
    G1 = -dH * W_sharp.W1 - quad * u1
    G2 = (
        (u2 + W2) * d_z(W2, grid, "even")
        + H ** (g - 1) / (g - 1) * d_z(W4, grid, "even")
        - d_z(W5, grid, "even")
    ) / U1
    G3 = -dH * W_sharp.W3
    R, Z = grid.mesh()
    G4 = quad - boundary.eps * boundary.b_tilde(R, Z)
    return GTerms(G1, G2, G3, G4)
