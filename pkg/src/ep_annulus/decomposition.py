"""Residual operators for the steady 3D Euler-Poisson system in cylindrical coordinates.

Two families are evaluated on a sampled field:

* the original seven equations (continuity, three momentum components,
  entropy and Bernoulli transport, Poisson);
* the deformation-curl-Poisson form: deformation equation with the density
  written through the Bernoulli law, the two algebraic vorticity relations,
  the transport identity for the radial vorticity, the K and A transport
  equations and the Poisson equation with ``rho = H(A, K, Phi, |U|^2)``.

Derivatives are second order: central in the interior, one-sided on the r and
x3 boundary rows, periodic in theta.  Norms only use interior r and x3 nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .background import InletData, integrate_background, resample
from .errors import DegenerateRadialVelocity
from .thermo import bernoulli_density as _bernoulli_density

VELOCITY_FLOOR = 1e-12

EULER_NAMES = ("continuity", "momentum_r", "momentum_theta", "momentum_3", "entropy", "bernoulli", "poisson")
DECOMPOSITION_NAMES = ("deformation", "vorticity_2", "vorticity_3", "omega1_transport", "K_transport", "A_transport", "poisson")


@dataclass(frozen=True)
class CylGrid3D:
    """Tensor grid: ``nr`` radii on [r0, r1], ``ntheta`` periodic angles, ``nz`` nodes on [-1, 1]."""

    nr: int
    ntheta: int
    nz: int
    r0: float = 1.0
    r1: float = 2.0

    def __post_init__(self):
        if min(self.nr, self.nz) < 5 or self.ntheta < 4:
            raise ValueError("grid too small")
        if not 0 < self.r0 < self.r1:
            raise ValueError("need 0 < r0 < r1")

    @classmethod
    def cube(cls, n: int, r0: float = 1.0, r1: float = 2.0) -> "CylGrid3D":
        """``n`` nodes in r and x3 and ``n - 1`` angles, so spacings halve with ``n -> 2n - 1``."""
        return cls(n, n - 1, n, r0, r1)

    @property
    def r(self):
        return np.linspace(self.r0, self.r1, self.nr)

    @property
    def theta(self):
        return 2 * np.pi * np.arange(self.ntheta) / self.ntheta

    @property
    def z(self):
        return np.linspace(-1.0, 1.0, self.nz)

    @property
    def h(self) -> tuple[float, float, float]:
        return ((self.r1 - self.r0) / (self.nr - 1), 2 * np.pi / self.ntheta, 2.0 / (self.nz - 1))

    @property
    def shape(self):
        return (self.nr, self.ntheta, self.nz)

    def mesh(self):
        return np.meshgrid(self.r, self.theta, self.z, indexing="ij")


@dataclass(frozen=True)
class CylField3D:
    grid: CylGrid3D
    U1: np.ndarray
    U2: np.ndarray
    U3: np.ndarray
    rho: np.ndarray
    A: np.ndarray
    K: np.ndarray
    Phi: np.ndarray
    b: np.ndarray
    gamma: float

    def __post_init__(self):
        for name in ("U1", "U2", "U3", "rho", "A", "K", "Phi", "b"):
            arr = np.broadcast_to(np.asarray(getattr(self, name), dtype=float), self.grid.shape)
            object.__setattr__(self, name, np.array(arr))
        if np.min(self.rho) <= 0:
            raise ValueError("density must be positive")

    def rotate_theta(self, k: int) -> "CylField3D":
        """The same field with every array rolled by ``k`` angular nodes."""
        names = ("U1", "U2", "U3", "rho", "A", "K", "Phi", "b")
        return replace(self, **{n: np.roll(getattr(self, n), k, axis=1) for n in names})


class VorticityField3D(NamedTuple):
    omega1: np.ndarray
    omega2: np.ndarray
    omega3: np.ndarray


# -- difference operators --------------------------------------------------------


def _d(f, h, axis):
    return np.gradient(f, h, axis=axis, edge_order=2)


def _d2(f, h, axis):
    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
    out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
    out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
    return np.moveaxis(out, 0, axis)


class _Ops:
    """Derivatives bound to one grid; ``dth`` is the plain angular derivative (no 1/r)."""

    def __init__(self, grid: CylGrid3D):
        self.hr, self.ht, self.hz = grid.h
        self.R = grid.r[:, None, None]

    def dr(self, f):
        return _d(f, self.hr, 0)

    def dth(self, f):
        return (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) / (2 * self.ht)

    def dz(self, f):
        return _d(f, self.hz, 2)

    def laplacian(self, f):
        d2th = (np.roll(f, -1, axis=1) - 2 * f + np.roll(f, 1, axis=1)) / self.ht**2
        return _d2(f, self.hr, 0) + self.dr(f) / self.R + d2th / self.R**2 + _d2(f, self.hz, 2)

    def advect(self, U1, U2, U3, f):
        return U1 * self.dr(f) + U2 / self.R * self.dth(f) + U3 * self.dz(f)


def _check_u1(field: CylField3D):
    low = float(np.min(field.U1))
    if low < VELOCITY_FLOOR:
        raise DegenerateRadialVelocity(f"U1 reaches {low:.3g}")


def interior(f: np.ndarray) -> np.ndarray:
    return f[1:-1, :, 1:-1]


def sup_interior(f: np.ndarray) -> float:
    return float(np.max(np.abs(interior(f))))


# -- original system -----------------------------------------------------------------


def euler_poisson_residual(field: CylField3D) -> dict[str, np.ndarray]:
    """Pointwise residuals of the seven equations, pressure ``P = A rho^gamma``."""
    op = _Ops(field.grid)
    R = op.R
    U1, U2, U3, rho = field.U1, field.U2, field.U3, field.rho
    P = field.A * rho**field.gamma

    def adv(f):
        return op.advect(U1, U2, U3, f)

    cont = op.dr(rho * U1) + op.dth(rho * U2) / R + op.dz(rho * U3) + rho * U1 / R
    mom_r = rho * (adv(U1) - U2**2 / R) + op.dr(P) - rho * op.dr(field.Phi)
    mom_t = rho * (adv(U2) + U1 * U2 / R) + (op.dth(P) - rho * op.dth(field.Phi)) / R
    mom_3 = rho * adv(U3) + op.dz(P) - rho * op.dz(field.Phi)
    poisson = op.laplacian(field.Phi) - (rho - field.b)
    return dict(zip(EULER_NAMES, (cont, mom_r, mom_t, mom_3, adv(field.A), adv(field.K), poisson)))


# -- decomposition ------------------------------------------------------------------------


def curl_field(field: CylField3D) -> VorticityField3D:
    op = _Ops(field.grid)
    R = op.R
    w1 = op.dth(field.U3) / R - op.dz(field.U2)
    w2 = op.dz(field.U1) - op.dr(field.U3)
    w3 = op.dr(field.U2) - op.dth(field.U1) / R + field.U2 / R
    return VorticityField3D(w1, w2, w3)


def divergence(field: CylField3D, v1, v2, v3) -> np.ndarray:
    """``(1/r) d_r(r v1) + (1/r) d_theta v2 + d_3 v3``."""
    op = _Ops(field.grid)
    return op.dr(v1) + v1 / op.R + op.dth(v2) / op.R + op.dz(v3)


def vorticity_algebraic(field: CylField3D, omega1=None) -> tuple[np.ndarray, np.ndarray]:
    """``omega2, omega3`` from the momentum equations, given ``omega1``."""
    _check_u1(field)
    op = _Ops(field.grid)
    w1 = curl_field(field).omega1 if omega1 is None else omega1
    g = field.gamma
    q = field.rho ** (g - 1) / (g - 1)
    U1, U2, U3 = field.U1, field.U2, field.U3
    w2 = (U2 * w1 + op.dz(field.K) - q * op.dz(field.A)) / U1
    w3 = (U3 * w1 - op.dth(field.K) / op.R + q * op.dth(field.A) / op.R) / U1
    return w2, w3


def bernoulli_density(A, K, Phi, speed_sq, gamma: float):
    """``H(A, K, Phi, |U|^2)``; raises :class:`VacuumState` on a non-positive bracket."""
    return _bernoulli_density(A, K, Phi, speed_sq, gamma)


def _speed_sq(field: CylField3D):
    return field.U1**2 + field.U2**2 + field.U3**2


def field_sound_speed_sq(field: CylField3D):
    return (field.gamma - 1) * (field.K + field.Phi - 0.5 * _speed_sq(field))


def deformation_residual(field: CylField3D) -> np.ndarray:
    """``M : D + c^2 U1 / r + U . grad Phi`` with ``c^2 = (gamma - 1)(K + Phi - |U|^2/2)``.

    The advective potential term is what the continuity equation leaves
    behind once ``H`` is differentiated along the flow; without it the
    expression does not vanish on solutions with a nonzero electric field.
    """
    op = _Ops(field.grid)
    R = op.R
    U = (field.U1, field.U2, field.U3)
    c2 = field_sound_speed_sq(field)
    g = [
        [op.dr(U[0]), op.dr(U[1]), op.dr(U[2])],
        [op.dth(U[0]) / R, op.dth(U[1]) / R, op.dth(U[2]) / R],
        [op.dz(U[0]), op.dz(U[1]), op.dz(U[2])],
    ]
    out = c2 * U[0] / R + op.advect(*U, field.Phi)
    for i in range(3):
        for j in range(3):
            d_ij = 0.5 * (g[i][j] + g[j][i])
            m_ij = (c2 if i == j else 0.0) - U[i] * U[j]
            out = out + m_ij * d_ij
    return out


def continuity_expanded(field: CylField3D) -> np.ndarray:
    """``(c^2/H) div(H U) - U.grad K + c^2/((gamma-1) A) U.grad A`` with ``H`` from the Bernoulli law.

    Algebraically equal to :func:`deformation_residual` for any smooth field.
    """
    op = _Ops(field.grid)
    R = op.R
    U1, U2, U3 = field.U1, field.U2, field.U3
    H = bernoulli_density(field.A, field.K, field.Phi, _speed_sq(field), field.gamma)
    c2 = field_sound_speed_sq(field)
    div_hu = op.dr(H * U1) + op.dth(H * U2) / R + op.dz(H * U3) + H * U1 / R
    return (
        c2 / H * div_hu
        - op.advect(U1, U2, U3, field.K)
        + c2 / ((field.gamma - 1) * field.A) * op.advect(U1, U2, U3, field.A)
    )


def transport_residuals(field: CylField3D) -> tuple[np.ndarray, np.ndarray]:
    """``(d_r + U2/(r U1) d_theta + U3/U1 d_3)`` applied to K and A."""
    _check_u1(field)
    op = _Ops(field.grid)
    U1, U2, U3 = field.U1, field.U2, field.U3
    return op.advect(U1, U2, U3, field.K) / U1, op.advect(U1, U2, U3, field.A) / U1


def omega1_transport_residual(field: CylField3D, omega1=None) -> np.ndarray:
    """The transport identity satisfied by the radial vorticity, source brackets included."""
    _check_u1(field)
    op = _Ops(field.grid)
    R = op.R
    w1 = curl_field(field).omega1 if omega1 is None else omega1
    U1, U2, U3 = field.U1, field.U2, field.U3
    g = field.gamma
    q = field.rho ** (g - 1)
    K, A = field.K, field.A
    inv = 1.0 / U1
    out = op.dr(w1) + U2 / (R * U1) * op.dth(w1) + U3 / U1 * op.dz(w1)
    out = out + (1.0 / R + op.dth(U2 / U1) / R + op.dz(U3 / U1)) * w1
    out = out + op.dth(inv) / R * op.dz(K) - op.dz(inv) * op.dth(K) / R
    out = out - op.dth(q / U1) / R * op.dz(A) / (g - 1) + op.dz(q / U1) * op.dth(A) / R / (g - 1)
    return out


def poisson_residual(field: CylField3D) -> np.ndarray:
    """``Delta Phi - (H(A, K, Phi, |U|^2) - b)``."""
    op = _Ops(field.grid)
    H = bernoulli_density(field.A, field.K, field.Phi, _speed_sq(field), field.gamma)
    return op.laplacian(field.Phi) - (H - field.b)


def decomposition_residuals(field: CylField3D) -> dict[str, np.ndarray]:
    w = curl_field(field)
    w2, w3 = vorticity_algebraic(field, w.omega1)
    k_res, a_res = transport_residuals(field)
    return dict(
        zip(
            DECOMPOSITION_NAMES,
            (
                deformation_residual(field),
                w.omega2 - w2,
                w.omega3 - w3,
                omega1_transport_residual(field, w.omega1),
                k_res,
                a_res,
                poisson_residual(field),
            ),
        )
    )


class EquivalenceReport(NamedTuple):
    euler: dict[str, float]
    decomposition: dict[str, float]

    @property
    def euler_max(self) -> float:
        return max(self.euler.values())

    @property
    def decomposition_max(self) -> float:
        return max(self.decomposition.values())


def equivalence_check(field: CylField3D) -> EquivalenceReport:
    """Interior sup norms of both residual families side by side."""
    e = {k: sup_interior(v) for k, v in euler_poisson_residual(field).items()}
    d = {k: sup_interior(v) for k, v in decomposition_residuals(field).items()}
    return EquivalenceReport(e, d)


# -- analytic test fields ---------------------------------------------------------------------


def lifted_background(inlet: InletData, grid: CylGrid3D, oversample: int = 32) -> CylField3D:
    """Radial background copied to every (theta, x3); integrated on an ``oversample``-times finer grid."""
    if abs(inlet.r0 - grid.r0) > 1e-14 or abs(inlet.r1 - grid.r1) > 1e-14:
        raise ValueError("grid and inlet radii differ")
    prof = resample(integrate_background(inlet, oversample * (grid.nr - 1) + 1), oversample)
    col = lambda a: np.asarray(a)[:, None, None]  # noqa: E731
    return CylField3D(
        grid, col(prof.u1), col(prof.u2), 0.0, col(prof.rho), inlet.a0, inlet.k0,
        col(prof.phi), inlet.b0, inlet.gamma,
    )


def potential_flow(
    grid: CylGrid3D,
    gamma: float = 2.0,
    rho: float = 1.0,
    A: float = 1.0,
    m: float = 1.0,
    V: float = 0.1,
    beta: float = 0.05,
    delta: float = 0.1,
    K0: float = 3.0,
) -> CylField3D:
    """Irrotational exact solution with constant density.

    The velocity is the gradient of the harmonic function
    ``m ln r + V r cos(t) + beta r^2 cos(2t) + delta r cos(t) x3``; the
    potential absorbs the kinetic energy so that ``K = K0`` and the ion
    density balances the Poisson equation.
    """
    R, T, Z = grid.mesh()
    U1 = m / R + V * np.cos(T) + 2 * beta * R * np.cos(2 * T) + delta * np.cos(T) * Z
    U2 = -V * np.sin(T) - 2 * beta * R * np.sin(2 * T) - delta * np.sin(T) * Z
    U3 = delta * R * np.cos(T)
    speed_sq = U1**2 + U2**2 + U3**2
    enthalpy = gamma * A * rho ** (gamma - 1) / (gamma - 1)
    Phi = 0.5 * speed_sq + enthalpy - K0
    # Laplacian of |grad phi|^2 / 2 is the squared Frobenius norm of the Hessian
    lap_phi = 2 * m**2 / R**4 - 8 * beta * m * np.cos(2 * T) / R**2 + 8 * beta**2 + 2 * delta**2
    return CylField3D(grid, U1, U2, U3, rho, A, K0, Phi, rho - lap_phi, gamma)


def swirl_shear(
    grid: CylGrid3D,
    gamma: float = 2.0,
    rho: float = 1.0,
    A: float = 1.0,
    u0: float = 0.5,
    s: float = 0.3,
    kappa: float = 0.2,
) -> CylField3D:
    """Exact rotational solution: source-vortex flow with an axial shear ``U3 = kappa r^2 / (2 u0)``.

    The axial electric field ``kappa`` drives the shear, so ``K`` varies with
    r and x3 while being constant along streamlines.
    """
    R, T, Z = grid.mesh()
    U1 = u0 / R
    U2 = s / R
    U3 = kappa * R**2 / (2 * u0)
    Phi = (u0**2 + s**2) / (2 * R**2) + kappa * Z
    enthalpy = gamma * A * rho ** (gamma - 1) / (gamma - 1)
    K = kappa**2 * R**4 / (8 * u0**2) + enthalpy - kappa * Z
    b = rho - 2 * (u0**2 + s**2) / R**4
    return CylField3D(grid, U1, U2, U3, rho, A, K, Phi, b, gamma)


def uniform_flow(grid: CylGrid3D, gamma: float = 2.0, rho: float = 1.0, A: float = 1.0) -> CylField3D:
    """``U = (1, 0, 0)`` everywhere; not a solution because of the geometric source ``rho U1 / r``."""
    K = 0.5 + gamma * A * rho ** (gamma - 1) / (gamma - 1)
    return CylField3D(grid, 1.0, 0.0, 0.0, rho, A, K, 0.0, rho, gamma)


def random_smooth(grid: CylGrid3D, seed: int = 0, gamma: float = 2.0, modes: int = 3) -> CylField3D:
    """Smooth random field with integer angular modes; positive U1, density and enthalpy."""
    rng = np.random.default_rng(seed)
    R, T, Z = grid.mesh()
    s = (R - grid.r0) / (grid.r1 - grid.r0)

    def bump(amp):
        out = np.zeros(grid.shape)
        for _ in range(modes):
            k = rng.integers(0, 3)
            a, p, q, w = rng.normal(size=4)
            l, n = rng.uniform(0.5, 2.0, size=2)
            out += a * np.cos(k * T + p) * np.sin(l * np.pi * s + q) * np.cos(n * np.pi * Z / 2 + w)
        return amp * out / modes

    return CylField3D(
        grid,
        U1=1.0 + bump(0.3),
        U2=0.5 + bump(0.3),
        U3=bump(0.3),
        rho=1.0 + bump(0.2),
        A=1.0 + bump(0.2),
        K=4.0 + bump(0.3),
        Phi=bump(0.3),
        b=0.5 + bump(0.1),
        gamma=gamma,
    )


PRESETS_3D = {
    "potential": potential_flow,
    "swirl_shear": swirl_shear,
    "uniform": uniform_flow,
    "random": random_smooth,
}
