"""Elliptic half of the axisymmetric scheme.

Two solves per sweep:

* ``psi1`` with ``(d_r^2 + d_3^2) psi1 = G2``, ``psi1(r1) = d_r psi1(r0) = 0``
  and ``psi1 = 0`` on the walls, computed on the odd reflection of the data
  across both walls;
* the coupled velocity potential / electrostatic system for ``(psi, phi)``

      d_r(a d_r psi) + d_3(b d_3 psi) + d_r(c phi) = d_r G1 + d_3 G3
      d_r(r d_r phi) + d_3(r d_3 phi) + c d_r psi - d phi = G4

  with ``a = r rho (1 - M1^2)``, ``b = r rho``, ``c = r rho U1 / c^2`` and
  ``d = r rho / c^2``, discretized by node-centred finite volumes.

The diffusion blocks of the coupled matrix are symmetric and the two
coupling blocks are negative transposes of each other, so the mixed terms
of the energy cancel exactly at the discrete level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .boundary import BoundaryPerturbation
from .errors import IterativeNoConvergence, SingularSystem
from .grid import Grid2D, d_r, d_z, d_zz, extend_symmetric
from .section import AxisymBackground

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class CoupledCoefficients:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        if np.min(self.a) <= 0:
            raise ValueError("r rho (1 - M1^2) must be positive (radially subsonic background)")

    @classmethod
    def from_background(cls, bg: AxisymBackground) -> "CoupledCoefficients":
        shape = bg.grid.shape
        r = bg.col("r")
        rho, c_sq = bg.col("rho"), bg.col("c_sq")
        one = np.ones(shape)
        return cls(
            a=one * r * rho * (1.0 - bg.col("m1_sq")),
            b=one * r * rho,
            c=one * r * rho * bg.col("u1") / c_sq,
            d=one * r * rho / c_sq,
        )


# -- psi1 -------------------------------------------------------------------


@lru_cache(maxsize=8)
def _psi1_factor(nr: int, nze: int, hr: float, hz: float):
    m = nr - 1
    main = np.full(m, -2.0)
    upper = np.ones(m - 1)
    upper[0] = 2.0  # ghost node of the Neumann condition at r0
    Lr = sp.diags([np.ones(m - 1), main, upper], [-1, 0, 1]) / hr**2
    k = nze - 2
    Lz = sp.diags([np.ones(k - 1), np.full(k, -2.0), np.ones(k - 1)], [-1, 0, 1]) / hz**2
    L = sp.kron(Lr, sp.identity(k)) + sp.kron(sp.identity(m), Lz)
    return spla.splu(L.tocsc())


def solve_psi1(G2: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Five-point solve for ``psi1`` on the odd extension x3 in [-3, 3]."""
    G2e = extend_symmetric(G2, "odd")
    nze = G2e.shape[1]
    lu = _psi1_factor(grid.nr, nze, grid.hr, grid.hz)
    rhs = G2e[:-1, 1:-1].ravel()
    sol = lu.solve(rhs).reshape(grid.nr - 1, nze - 2)
    ext = np.zeros((grid.nr, nze))
    ext[:-1, 1:-1] = sol
    psi1 = ext[:, grid.nz - 1 : 2 * grid.nz - 1].copy()
    psi1[:, [0, -1]] = 0.0
    return psi1


def psi1_wall_checks(psi1: np.ndarray, grid: Grid2D) -> dict[str, float]:
    """``d_r psi1`` and ``d_3^2 psi1`` on the walls (both vanish for compatible data)."""
    walls = [0, -1]
    return {
        "dr_psi1": float(np.max(np.abs(d_r(psi1, grid)[:, walls]))),
        "d33_psi1": float(np.max(np.abs(d_zz(psi1, grid, "odd")[:, walls]))),
    }


# -- coupled system -----------------------------------------------------------


def _weights(grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    wr = np.full(grid.nr, grid.hr)
    wr[[0, -1]] *= 0.5
    wz = np.full(grid.nz, grid.hz)
    wz[[0, -1]] *= 0.5
    return wr, wz


def _stiffness(kr: np.ndarray, kz: np.ndarray, grid: Grid2D) -> sp.csr_matrix:
    """Symmetric FV stiffness for ``-div(diag(kr, kz) grad)`` with natural boundaries."""
    nr, nz = grid.shape
    wr, wz = _weights(grid)
    idx = np.arange(nr * nz).reshape(nr, nz)
    rows, cols, vals = [], [], []

    def couple(p, q, k):
        rows.extend([p, q, p, q])
        cols.extend([p, q, q, p])
        vals.extend([k, k, -k, -k])

    k = wz[None, :] * 0.5 * (kr[1:, :] + kr[:-1, :]) / grid.hr
    couple(idx[:-1, :].ravel(), idx[1:, :].ravel(), k.ravel())
    k = wr[:, None] * 0.5 * (kz[:, 1:] + kz[:, :-1]) / grid.hz
    couple(idx[:, :-1].ravel(), idx[:, 1:].ravel(), k.ravel())
    n = nr * nz
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


class CoupledBlocks(NamedTuple):
    K_psi: sp.csr_matrix
    K_phi: sp.csr_matrix
    M_d: sp.csr_matrix
    C_psi: sp.csr_matrix  # psi rows, phi columns: flux form of d_r(c phi)
    C_phi: sp.csr_matrix  # phi rows, psi columns: c d_r psi at the nodes


def coupled_blocks(coeffs: CoupledCoefficients, grid: Grid2D) -> CoupledBlocks:
    nr, nz = grid.shape
    n = nr * nz
    wr, wz = _weights(grid)
    idx = np.arange(n).reshape(nr, nz)
    R = grid.mesh()[0]
    K_psi = _stiffness(coeffs.a, coeffs.b, grid)
    K_phi = _stiffness(R, R, grid)
    M_d = sp.diags((np.outer(wr, wz) * coeffs.d).ravel()).tocsr()

    c = coeffs.c
    W = np.broadcast_to(wz[None, :], (nr, nz))
    rows, cols, vals = [], [], []
    # face between i and i+1 carries wz * (c_i phi_i + c_{i+1} phi_{i+1}) / 2
    lo, hi = idx[:-1, :].ravel(), idx[1:, :].ravel()
    half_lo = (0.5 * W[:-1, :] * c[:-1, :]).ravel()
    half_hi = (0.5 * W[1:, :] * c[1:, :]).ravel()
    rows += [lo, lo, hi, hi]
    cols += [lo, hi, lo, hi]
    vals += [half_lo, half_hi, -half_lo, -half_hi]
    # boundary faces at r0 (outward -r) and r1 (outward +r)
    rows += [idx[0, :], idx[-1, :]]
    cols += [idx[0, :], idx[-1, :]]
    vals += [-W[0, :] * c[0, :], W[-1, :] * c[-1, :]]
    C_psi = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )

    inner = idx[1:-1, :].ravel()
    coef = (0.5 * W[1:-1, :] * c[1:-1, :]).ravel()
    C_phi = sp.csr_matrix(
        (
            np.concatenate([coef, -coef]),
            (np.concatenate([inner, inner]), np.concatenate([idx[2:, :].ravel(), idx[:-2, :].ravel()])),
        ),
        shape=(n, n),
    )
    return CoupledBlocks(K_psi, K_phi, M_d, C_psi, C_phi)


def full_operator(blocks: CoupledBlocks) -> sp.csr_matrix:
    """Coupled operator before boundary conditions, ordered (psi, phi)."""
    return sp.bmat(
        [[-blocks.K_psi, blocks.C_psi], [blocks.C_phi, -blocks.K_phi - blocks.M_d]], format="csr"
    )


def psi_inner_dirichlet(boundary: BoundaryPerturbation, grid: Grid2D) -> np.ndarray:
    """``psi(r0, x3) = eps * int_{-1}^{x3} u3_en``, shifted so that ``psi(r0, 0) = 0``."""
    z = grid.z
    f = boundary.u3_en(z)
    cum = np.concatenate(([0.0], np.cumsum(0.5 * grid.hz * (f[1:] + f[:-1]))))
    return boundary.eps * (cum - np.interp(0.0, z, cum))


@dataclass
class SparseSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    grid: Grid2D
    factor: Optional[object] = field(default=None, repr=False)

    @property
    def n_psi(self) -> int:
        return self.grid.nr * self.grid.nz

    def dump_coo(self, path) -> None:
        """Write ``i j value`` lines (0-based) for external inspection."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(Path(path), "w") as fh:
            for i, j, v in zip(coo.row[order], coo.col[order], coo.data[order]):
                fh.write(f"{i} {j} {v:.17g}\n")


class CoupledOperator:
    """Assembled and factorized (psi, phi) matrix; only the right-hand side changes per sweep."""

    def __init__(self, coeffs: CoupledCoefficients, grid: Grid2D):
        self.coeffs = coeffs
        self.grid = grid
        self.blocks = coupled_blocks(coeffs, grid)
        A = full_operator(self.blocks)
        nr, nz = grid.shape
        n = nr * nz
        fixed = np.zeros(2 * n, dtype=bool)
        fixed[np.arange(nz)] = True  # psi at r0
        fixed[n + np.arange(nz)] = True  # phi at r0
        fixed[n + (nr - 1) * nz + np.arange(nz)] = True  # phi at r1
        self.fixed = fixed
        free = sp.diags((~fixed).astype(float))
        self._coupling = A[:, np.flatnonzero(fixed)]
        self.matrix = (free @ A @ free + sp.diags(fixed.astype(float))).tocsr()
        self.matrix.eliminate_zeros()
        self._lu = None

    def factorization(self):
        if self._lu is None:
            try:
                self._lu = spla.splu(self.matrix.tocsc())
            except RuntimeError as exc:
                raise SingularSystem(str(exc)) from exc
        return self._lu

    def rhs(self, Gt1, Gt3, Gt4, boundary: BoundaryPerturbation) -> np.ndarray:
        grid = self.grid
        nr, nz = grid.shape
        n = nr * nz
        wr, wz = _weights(grid)
        s = np.zeros((nr, nz))
        # minus the outward flux of (G1, G3) through each cell face
        face = 0.5 * (Gt1[1:, :] + Gt1[:-1, :]) * wz[None, :]
        s[:-1, :] -= face
        s[1:, :] += face
        face = 0.5 * (Gt3[:, 1:] + Gt3[:, :-1]) * wr[:, None]
        s[:, :-1] -= face
        s[:, 1:] += face
        s[:, -1] -= wr * Gt3[:, -1]
        s[:, 0] += wr * Gt3[:, 0]
        # prescribed normal velocity at r1
        s[-1, :] += wz * (self.coeffs.a[-1, :] * boundary.eps * boundary.u1_ex(grid.z) - Gt1[-1, :])
        b = np.concatenate([-s.ravel(), (np.outer(wr, wz) * Gt4).ravel()])

        values = np.zeros(2 * n)
        values[:nz] = psi_inner_dirichlet(boundary, grid)
        fixed_vals = values[self.fixed]
        b = b - self._coupling @ fixed_vals
        b[self.fixed] = fixed_vals
        return b


def assemble_coupled(
    coeffs: CoupledCoefficients,
    Gt1: np.ndarray,
    Gt3: np.ndarray,
    Gt4: np.ndarray,
    boundary: BoundaryPerturbation,
    grid: Grid2D,
    operator: Optional[CoupledOperator] = None,
) -> SparseSystem:
    op = operator if operator is not None else CoupledOperator(coeffs, grid)
    return SparseSystem(op.matrix, op.rhs(Gt1, Gt3, Gt4, boundary), grid, factor=op)


def solve_coupled(system: SparseSystem, method: str = "lu") -> tuple[np.ndarray, np.ndarray]:
    """Solve the assembled system; returns ``(psi, phi)`` on the grid."""
    A, b = system.matrix, system.rhs
    b_norm = float(np.max(np.abs(b))) if b.size else 0.0
    if b_norm == 0.0:
        x = np.zeros_like(b)
    elif method == "lu":
        if isinstance(system.factor, CoupledOperator):
            lu = system.factor.factorization()
        else:
            try:
                lu = spla.splu(A.tocsc())
            except RuntimeError as exc:
                raise SingularSystem(str(exc)) from exc
        x = lu.solve(b)
    elif method == "bicgstab":
        try:
            ilu = spla.spilu(A.tocsc(), drop_tol=1e-6, fill_factor=20)
        except RuntimeError as exc:
            raise SingularSystem(str(exc)) from exc
        M = spla.LinearOperator(A.shape, ilu.solve)
        x, info = spla.bicgstab(A, b, M=M, rtol=1e-13, atol=0.0, maxiter=2000)
        if info != 0:
            raise IterativeNoConvergence(f"bicgstab returned info={info}")
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(x)):
        raise SingularSystem("non-finite solution")
    res = float(np.max(np.abs(A @ x - b)))
    if res > RESIDUAL_TOL * max(b_norm, 1e-300):
        raise SingularSystem(f"residual {res:.3g} exceeds tolerance for |b| = {b_norm:.3g}")
    n = system.n_psi
    shape = system.grid.shape
    return x[:n].reshape(shape), x[n:].reshape(shape)


# -- recovery -------------------------------------------------------------------


def phi_blend(boundary: BoundaryPerturbation, grid: Grid2D, nu_z: int = 0) -> np.ndarray:
    """Linear blend of the potential data between the two cylinders (or its x3-derivative)."""
    R, Z = grid.mesh()
    s = (R - grid.r0) / (grid.r1 - grid.r0)
    return boundary.eps * ((1 - s) * boundary.phi_en(Z, nu_z) + s * boundary.phi_ex(Z, nu_z))


def r_laplacian_phi_blend(boundary: BoundaryPerturbation, grid: Grid2D) -> np.ndarray:
    """``r (d_r^2 + d_r / r + d_3^2) phi1``, exact for the blend."""
    R, Z = grid.mesh()
    dr = boundary.eps * (boundary.phi_ex(Z) - boundary.phi_en(Z)) / (grid.r1 - grid.r0)
    return dr + R * phi_blend(boundary, grid, nu_z=2)


def _d_r_recovery(f: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Central r-derivative with third-order one-sided ends.

    The recovered velocities are differentiated again by the residual
    checks; a second-order end stencil has a different error constant from
    the interior one, which the outer difference turns into an O(h) defect.
    """
    out = d_r(f, grid)
    h = grid.hr
    out[0] = (-11 * f[0] + 18 * f[1] - 9 * f[2] + 2 * f[3]) / (6 * h)
    out[-1] = (11 * f[-1] - 18 * f[-2] + 9 * f[-3] - 2 * f[-4]) / (6 * h)
    return out


def recover_deviation(psi, phi, psi1, boundary: BoundaryPerturbation, grid: Grid2D):
    """``W1 = d_r psi - d_3 psi1``, ``W3 = d_3 psi + d_r psi1``, ``W6 = phi + phi1``."""
    W1 = _d_r_recovery(psi, grid) - d_z(psi1, grid, "odd")
    W3 = d_z(psi, grid, "even") + _d_r_recovery(psi1, grid)
    W6 = phi + phi_blend(boundary, grid)
    return W1, W3, W6


# -- coercivity ---------------------------------------------------------------------


class CoercivityReport(NamedTuple):
    min_quotient: float
    max_mixed_relative: float
    quotients: np.ndarray


def _probe_pair(rng: np.random.Generator, grid: Grid2D, modes: int = 4):
    R, Z = grid.mesh()
    s = (R - grid.r0) / (grid.r1 - grid.r0)
    t = 0.5 * (Z + 1.0)
    psi = np.zeros(grid.shape)
    phi = np.zeros(grid.shape)
    for k in range(modes):
        for l in range(modes):
            a, b, p, q = rng.normal(size=4) / (1.0 + k + l)
            psi += a * np.cos(k * np.pi * s + p) * np.cos(l * np.pi * t + q)
            phi += b * np.sin((k + 1) * np.pi * s) * np.cos(l * np.pi * t + q)
    return psi, phi


def remove_weighted_mean(psi: np.ndarray, grid: Grid2D) -> np.ndarray:
    w = grid.trapezoid_weights() * grid.r[:, None]
    return psi - np.sum(w * psi) / np.sum(w)


def bilinear_energy(blocks: CoupledBlocks, psi: np.ndarray, phi: np.ndarray):
    """``B[(psi, phi), (psi, phi)]`` and its two mixed terms."""
    x, y = psi.ravel(), phi.ravel()
    mixed_a = -float(x @ (blocks.C_psi @ y))
    mixed_b = -float(y @ (blocks.C_phi @ x))
    diag = float(x @ (blocks.K_psi @ x) + y @ (blocks.K_phi @ y) + y @ (blocks.M_d @ y))
    return diag + mixed_a + mixed_b, mixed_a, mixed_b


def h1_sq(f: np.ndarray, grid: Grid2D) -> float:
    """r-weighted discrete ``|f|_{H1}^2``."""
    R = grid.mesh()[0]
    K = _stiffness(R, R, grid)
    w = grid.trapezoid_weights() * R
    v = f.ravel()
    return float(v @ (K @ v) + np.sum(w * f * f))


def coercivity_probe(
    coeffs: CoupledCoefficients, grid: Grid2D, n_samples: int, seed: int = 0
) -> CoercivityReport:
    """Minimum of ``B / (|psi|_H1^2 + |phi|_H1^2)`` over random smooth probe pairs.

    ``psi`` is projected to r-weighted mean zero and ``phi`` vanishes on both
    cylinders, mirroring the function space of the weak formulation.
    """
    rng = np.random.default_rng(seed)
    blocks = coupled_blocks(coeffs, grid)
    quotients = np.empty(n_samples)
    mixed = 0.0
    for k in range(n_samples):
        psi, phi = _probe_pair(rng, grid)
        psi = remove_weighted_mean(psi, grid)
        energy, ma, mb = bilinear_energy(blocks, psi, phi)
        quotients[k] = energy / (h1_sq(psi, grid) + h1_sq(phi, grid))
        # rounding scale of the two sums
        scale = float(np.abs(psi.ravel()) @ (abs(blocks.C_psi) @ np.abs(phi.ravel())))
        if scale > 0:
            mixed = max(mixed, abs(ma + mb) / scale)
    return CoercivityReport(float(np.min(quotients)), mixed, quotients)
