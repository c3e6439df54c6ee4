"""Picard iteration for the axisymmetric deviation and residual certification."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .boundary import BoundaryPerturbation
from .elliptic import (
    CoupledCoefficients,
    CoupledOperator,
    assemble_coupled,
    phi_blend,
    r_laplacian_phi_blend,
    recover_deviation,
    solve_coupled,
    solve_psi1,
)
from .errors import MaxIterExceeded, NoContraction, TrustRegionExceeded
from .grid import Grid2D, bilinear, d_r, d_rr, d_z, d_zz
from .section import AxisymBackground, DeviationField
from .thermo import bernoulli_density
from .transport import eval_g_terms, solve_transport

NO_CONTRACTION_STREAK = 5


def default_delta_guard(eps: float) -> float:
    return 100.0 * abs(eps) if eps != 0 else 1.0


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-10
    max_iter: int = 100
    delta_guard: Optional[float] = None  # None -> 100 * eps
    grid: Optional[Grid2D] = None
    method: str = "lu"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.delta_guard is not None and not self.delta_guard > 0:
            raise ValueError("delta_guard must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    def guard_for(self, eps: float) -> float:
        return self.delta_guard if self.delta_guard is not None else default_delta_guard(eps)


class ResidualNorms(NamedTuple):
    names: tuple[str, ...]
    sup: np.ndarray
    l2: np.ndarray


@dataclass(frozen=True)
class SolveReport:
    field: DeviationField
    iterations: int
    increments: tuple[float, ...]
    c1_increments: tuple[float, ...]
    ratios: tuple[float, ...]
    contraction_ratio: float
    residual: Optional[ResidualNorms] = None
    converged: bool = True


class MapContext:
    """Per-background data reused across sweeps (coefficients and the factorized matrix)."""

    def __init__(self, bg: AxisymBackground, method: str = "lu"):
        self.bg = bg
        self.coeffs = CoupledCoefficients.from_background(bg)
        self.operator = CoupledOperator(self.coeffs, bg.grid)
        self.method = method


def apply_map(
    W_sharp: DeviationField,
    bg: AxisymBackground,
    boundary: BoundaryPerturbation,
    context: Optional[MapContext] = None,
    delta_guard: Optional[float] = None,
) -> DeviationField:
    """One sweep of the iteration map."""
    if delta_guard is not None and W_sharp.sup_norm() > delta_guard:
        raise TrustRegionExceeded(f"|W#| = {W_sharp.sup_norm():.3g} exceeds delta_0 = {delta_guard:.3g}")
    ctx = context if context is not None else MapContext(bg)
    grid = bg.grid
    W2, W4, W5 = solve_transport(W_sharp.W1, W_sharp.W3, bg, boundary)
    G1, G2, G3, G4 = eval_g_terms(W_sharp, W2, W4, W5, bg, boundary)
    psi1 = solve_psi1(G2, grid)

    g, a0 = bg.gamma, bg.a0
    r = bg.col("r")
    rho, u1, u2, c_sq = bg.col("rho"), bg.col("u1"), bg.col("u2"), bg.col("c_sq")
    m1m2 = u1 * u2 / c_sq
    dz_psi1 = d_z(psi1, grid, "odd")
    dr_psi1 = d_r(psi1, grid)
    Gt1 = r * (
        G1
        + rho * (1 - u1**2 / c_sq) * dz_psi1
        + rho * m1m2 * W2
        + rho * u1 / ((g - 1) * a0) * W4
        - rho * u1 / c_sq * W5
    )
    Gt3 = r * (G3 - rho * dr_psi1)
    Gt4 = r * (
        G4
        + rho * u1 / c_sq * dz_psi1
        - rho * u2 / c_sq * W2
        - rho / ((g - 1) * a0) * W4
        + rho / c_sq * W5
    )
    c = ctx.coeffs
    phi1 = phi_blend(boundary, grid)
    Gtt1 = Gt1 - c.c * phi1
    Gtt4 = Gt4 + c.d * phi1 - r_laplacian_phi_blend(boundary, grid)

    system = assemble_coupled(c, Gtt1, Gt3, Gtt4, boundary, grid, operator=ctx.operator)
    psi, phi = solve_coupled(system, ctx.method)
    W1, W3, W6 = recover_deviation(psi, phi, psi1, boundary, grid)
    return DeviationField(W1, W2, W3, W4, W5, W6)


def _contraction_estimate(increments) -> float:
    """Geometric mean of the last two increment ratios (the first increment is skipped)."""
    d = [x for x in increments[1:]]
    if len(d) < 3 or d[-3] <= 0:
        return 0.0
    return float(np.sqrt(d[-1] / d[-3]))


def fixed_point_solve(
    bg: AxisymBackground,
    boundary: BoundaryPerturbation,
    opts: SolveOptions = SolveOptions(),
    with_residual: bool = True,
) -> SolveReport:
    """Iterate ``W^{k+1} = P(W^k)`` from zero until the sup increment is below ``opts.tol``."""
    if opts.grid is not None and opts.grid != bg.grid:
        raise ValueError("options grid differs from background grid")
    guard = opts.guard_for(boundary.eps)
    ctx = MapContext(bg, opts.method)
    grid = bg.grid
    W = DeviationField.zeros(grid)
    increments: list[float] = []
    c1_incs: list[float] = []
    ratios: list[float] = []
    streak = 0
    for k in range(1, opts.max_iter + 1):
        W_new = apply_map(W, bg, boundary, ctx, guard)
        diff = W_new - W
        inc = diff.sup_norm()
        increments.append(inc)
        c1_incs.append(diff.c1_norm(grid))
        W = W_new
        if not np.isfinite(inc):
            raise NoContraction("non-finite increment")
        if len(increments) >= 2 and increments[-2] > 0:
            ratio = inc / increments[-2]
            ratios.append(ratio)
            streak = streak + 1 if ratio >= 1.0 else 0
            if streak >= NO_CONTRACTION_STREAK:
                raise NoContraction(f"increment grew for {streak} consecutive iterations")
        if W.sup_norm() > guard:
            raise TrustRegionExceeded(f"|W| = {W.sup_norm():.3g} exceeds delta_0 = {guard:.3g}")
        if inc <= opts.tol:
            residual = full_residual(W, bg, boundary) if with_residual else None
            return SolveReport(
                W, k, tuple(increments), tuple(c1_incs), tuple(ratios),
                _contraction_estimate(increments), residual,
            )
    raise MaxIterExceeded(f"no convergence in {opts.max_iter} iterations (last increment {increments[-1]:.3g})")


# -- certification ----------------------------------------------------------------

RESIDUAL_NAMES = ("continuity", "momentum_r", "momentum_theta", "momentum_3", "entropy", "poisson")


def total_state(W: DeviationField, bg: AxisymBackground):
    """Total fields ``(rho, U1, U2, U3, A, K, Phi)`` of background plus deviation."""
    U1 = bg.col("u1") + W.W1
    U2 = bg.col("u2") + W.W2
    U3 = W.W3
    A = bg.a0 + W.W4
    K = bg.k0 + W.W5
    Phi = bg.col("phi") + W.W6
    rho = bernoulli_density(A, K, Phi, U1**2 + U2**2 + U3**2, bg.gamma)
    return rho, U1, U2, U3, A, K, Phi


def residual_fields(W: DeviationField, bg: AxisymBackground, boundary: BoundaryPerturbation):
    """Pointwise residuals of the six axisymmetric equations for the total flow."""
    grid = bg.grid
    R, Z = grid.mesh()
    rho, U1, U2, U3, A, K, Phi = total_state(W, bg)
    P = A * rho**bg.gamma

    def dr(f):
        return d_r(f, grid)

    def dz(f):
        return d_z(f, grid)

    b = bg.inlet.b0 + boundary.eps * boundary.b_tilde(R, Z)
    cont = (dr(R * rho * U1) + dz(R * rho * U3)) / R
    mom_r = rho * (U1 * dr(U1) + U3 * dz(U1) - U2**2 / R) + dr(P) - rho * dr(Phi)
    mom_t = rho * (U1 * dr(U2) + U3 * dz(U2) + U1 * U2 / R)
    mom_3 = rho * (U1 * dr(U3) + U3 * dz(U3)) + dz(P) - rho * dz(Phi)
    entropy = U1 * dr(A) + U3 * dz(A)
    poisson = d_rr(Phi, grid) + dr(Phi) / R + d_zz(Phi, grid) - (rho - b)
    return dict(zip(RESIDUAL_NAMES, (cont, mom_r, mom_t, mom_3, entropy, poisson)))


def full_residual(
    W: DeviationField, bg: AxisymBackground, boundary: BoundaryPerturbation, margin: int = 1
) -> ResidualNorms:
    """Interior sup and r-weighted L2 norms of the six residuals.

    ``margin`` boundary layers are left out (one by default).  The recovered
    velocities are themselves differences of the potentials, so the row next
    to the outflow cylinder carries the O(h) consistency error of the
    half-cell Neumann closure; ``margin=2`` measures the interior order.
    """
    grid = bg.grid
    fields = residual_fields(W, bg, boundary)
    inner = (slice(margin, -margin), slice(margin, -margin))
    w = (grid.hr * grid.hz * grid.r[:, None] * np.ones(grid.shape))[inner]
    sup, l2 = [], []
    for name in RESIDUAL_NAMES:
        f = fields[name][inner]
        sup.append(float(np.max(np.abs(f))))
        l2.append(float(np.sqrt(np.sum(w * f * f))))
    return ResidualNorms(RESIDUAL_NAMES, np.array(sup), np.array(l2))


class StreamlineReport(NamedTuple):
    seeds: np.ndarray
    variation_K: np.ndarray
    variation_A: np.ndarray
    variation_rU2: np.ndarray

    @property
    def max_variation(self) -> float:
        return float(max(self.variation_K.max(), self.variation_A.max(), self.variation_rU2.max()))


def streamline_invariants(
    W: DeviationField, bg: AxisymBackground, n_lines: int = 20, samples: int = 200
) -> StreamlineReport:
    """Variation of ``K``, ``A`` and ``r U2`` along streamlines traced from the inner cylinder.

    Streamlines solve ``dx3/dr = U3 / U1`` for the interpolated total velocity
    with an adaptive integrator, independently of the grid-aligned tracing
    used inside the iteration.
    """
    grid = bg.grid
    U1 = bg.col("u1") + W.W1
    slope = W.W3 / U1
    K = bg.k0 + W.W5
    A = bg.a0 + W.W4
    rU2 = bg.col("r") * (bg.col("u2") + W.W2)
    seeds = np.linspace(-1.0, 1.0, n_lines + 2)[1:-1]
    r_eval = np.linspace(grid.r0, grid.r1, samples)

    def rhs(r, z):
        return bilinear(slope, grid, np.full_like(z, r), np.clip(z, -1.0, 1.0))

    sol = solve_ivp(rhs, (grid.r0, grid.r1), seeds, t_eval=r_eval, rtol=1e-12, atol=1e-14)
    zs = np.clip(sol.y, -1.0, 1.0)
    rr = np.broadcast_to(r_eval, zs.shape)
    out = []
    for f in (K, A, rU2):
        vals = bilinear(f, grid, rr.ravel(), zs.ravel()).reshape(zs.shape)
        out.append(vals.max(axis=1) - vals.min(axis=1))
    return StreamlineReport(seeds, *out)
