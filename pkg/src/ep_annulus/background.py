"""Radially symmetric background flows of the Euler-Poisson system.

The background state depends on r only.  Mass flux and angular momentum are
conserved exactly (``r rho u1 = m1``, ``r u2 = m2``), the entropy is the
constant ``A0`` and the remaining unknowns ``(rho, r E)`` obey

    rho'   = rho (u1^2 + u2^2 + E r) / (r (c^2 - u1^2))
    (r E)' = r (rho - b0)

with ``c^2 = gamma A0 rho^(gamma-1)``.  The potential is recovered from
``Phi(r) = int_{r0}^{r} E``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import (
    BackgroundBlowUp,
    MultipleCrossings,
    NonPositiveDensity,
    NotEnoughNodes,
    RadialSonicDegeneracy,
)

SONIC_FLOOR = 1e-8
SONIC_TOL = 1e-10


@dataclass(frozen=True)
class InletData:
    gamma: float
    rho0: float
    u10: float
    u20: float
    a0: float
    e0: float
    b0: float
    r0: float = 1.0
    r1: float = 2.0

    @property
    def c0_sq(self) -> float:
        return self.gamma * self.a0 * self.rho0 ** (self.gamma - 1.0)

    @property
    def m1(self) -> float:
        return self.r0 * self.rho0 * self.u10

    @property
    def m2(self) -> float:
        return self.r0 * self.u20

    @property
    def k0(self) -> float:
        """Bernoulli constant at the inlet, with ``Phi(r0) = 0``."""
        g = self.gamma
        return 0.5 * (self.u10**2 + self.u20**2) + g / (g - 1.0) * self.a0 * self.rho0 ** (g - 1.0)

    def replace(self, **changes) -> "InletData":
        from dataclasses import replace

        return replace(self, **changes)


# Flow regime tags -----------------------------------------------------------


@dataclass(frozen=True)
class Subsonic:
    name = "subsonic"


@dataclass(frozen=True)
class TransonicCandidate:
    name = "transonic_candidate"


@dataclass(frozen=True)
class Transonic:
    r_c: float
    name = "transonic"


@dataclass(frozen=True)
class Invalid:
    reason: str
    name = "invalid"


FlowRegime = Union[Subsonic, TransonicCandidate, Transonic, Invalid]


@dataclass(frozen=True)
class MachState:
    """Squared radial and azimuthal Mach numbers (scalars or node arrays)."""

    m1_sq: np.ndarray
    m2_sq: np.ndarray

    @property
    def total_sq(self) -> np.ndarray:
        return self.m1_sq + self.m2_sq


@dataclass(frozen=True)
class BackgroundProfile:
    r_nodes: np.ndarray
    rho: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    e_field: np.ndarray
    phi: np.ndarray
    m1: float
    m2: float
    a_const: float
    regime: FlowRegime
    inlet: InletData = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return self.r_nodes.size

    @property
    def gamma(self) -> float:
        return self.inlet.gamma

    @property
    def c_sq(self) -> np.ndarray:
        return self.inlet.gamma * self.a_const * self.rho ** (self.inlet.gamma - 1.0)


def classify_inlet(inlet: InletData) -> FlowRegime:
    """Pre-integration regime from the inlet state alone."""
    if not inlet.gamma > 1.0:
        return Invalid("gamma <= 1")
    if not (inlet.rho0 > 0 and inlet.u10 > 0 and inlet.a0 > 0 and inlet.e0 > 0):
        return Invalid("rho0, u10, a0 and e0 must be positive")
    if not 0 < inlet.r0 < inlet.r1:
        return Invalid("need 0 < r0 < r1")
    if inlet.rho0 <= inlet.b0:
        return Invalid("rho0 <= b0")
    c0_sq = inlet.c0_sq
    if c0_sq <= inlet.u10**2:
        return Invalid("c0^2 <= u10^2 (supersonic in r)")
    speed_sq = inlet.u10**2 + inlet.u20**2
    if c0_sq > speed_sq:
        return Subsonic()
    if c0_sq < speed_sq:
        return TransonicCandidate()
    return Invalid("inlet is exactly sonic")


def _rhs(r: float, rho: float, re: float, inlet: InletData) -> tuple[float, float]:
    if rho <= 0.0:
        raise NonPositiveDensity(f"rho = {rho:.6g} at r = {r:.6g}")
    if not np.isfinite(rho) or not np.isfinite(re):
        raise BackgroundBlowUp(f"state overflowed near r = {r:.6g}")
    g = inlet.gamma
    u1 = inlet.m1 / (r * rho)
    u2 = inlet.m2 / r
    c_sq = g * inlet.a0 * rho ** (g - 1.0)
    gap = 1.0 - u1 * u1 / c_sq
    if gap < SONIC_FLOOR:
        raise RadialSonicDegeneracy(f"1 - M1^2 = {gap:.3g} at r = {r:.6g}")
    drho = rho * (u1 * u1 + u2 * u2 + re) / (r * c_sq * gap)
    dre = r * (rho - inlet.b0)
    return drho, dre


def _rk4_step(r: float, rho: float, re: float, h: float, inlet: InletData) -> tuple[float, float]:
    k1 = _rhs(r, rho, re, inlet)
    k2 = _rhs(r + 0.5 * h, rho + 0.5 * h * k1[0], re + 0.5 * h * k1[1], inlet)
    k3 = _rhs(r + 0.5 * h, rho + 0.5 * h * k2[0], re + 0.5 * h * k2[1], inlet)
    k4 = _rhs(r + h, rho + h * k3[0], re + h * k3[1], inlet)
    rho_new = rho + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    re_new = re + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    if not (np.isfinite(rho_new) and np.isfinite(re_new)):
        raise BackgroundBlowUp(f"state overflowed near r = {r + h:.6g}")
    if rho_new <= 0.0:
        raise NonPositiveDensity(f"rho = {rho_new:.6g} at r = {r + h:.6g}")
    return rho_new, re_new


def integrate_background(inlet: InletData, n_nodes: int = 2049) -> BackgroundProfile:
    """Integrate the radial system with fixed-step RK4 on a uniform grid.

    Raises
    ------
    ValueError
        If the inlet is classified invalid or ``n_nodes < 16``.
    RadialSonicDegeneracy
        If ``1 - M1^2`` drops below ``SONIC_FLOOR``.
    NonPositiveDensity
        If the density leaves the positive axis.
    BackgroundBlowUp
        If the state overflows before ``r1``.
    """
    regime = classify_inlet(inlet)
    if isinstance(regime, Invalid):
        raise ValueError(f"invalid inlet: {regime.reason}")
    if n_nodes < 16:
        raise ValueError("n_nodes must be at least 16")

    r = np.linspace(inlet.r0, inlet.r1, n_nodes)
    h = r[1] - r[0]
    rho = np.empty(n_nodes)
    re = np.empty(n_nodes)
    rho[0] = inlet.rho0
    re[0] = inlet.r0 * inlet.e0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_nodes - 1):
            rho[k + 1], re[k + 1] = _rk4_step(r[k], rho[k], re[k], h, inlet)

    e_field = re / r
    phi = np.concatenate(([0.0], np.cumsum(0.5 * h * (e_field[1:] + e_field[:-1]))))
    profile = BackgroundProfile(
        r_nodes=r,
        rho=rho,
        u1=inlet.m1 / (r * rho),
        u2=inlet.m2 / r,
        e_field=e_field,
        phi=phi,
        m1=inlet.m1,
        m2=inlet.m2,
        a_const=inlet.a0,
        regime=regime,
        inlet=inlet,
    )
    mach = mach_profile(profile)
    if isinstance(regime, Subsonic):
        if np.any(mach.total_sq >= 1.0):
            regime = Invalid("|M|^2 reached 1 on a subsonic inlet")
    else:
        r_c = find_sonic_radius(profile)
        if r_c is not None:
            regime = Transonic(r_c)
    return _with_regime(profile, regime)


def _with_regime(profile: BackgroundProfile, regime: FlowRegime) -> BackgroundProfile:
    from dataclasses import replace

    return replace(profile, regime=regime)


def mach_profile(profile: BackgroundProfile) -> MachState:
    c_sq = profile.c_sq
    return MachState(profile.u1**2 / c_sq, profile.u2**2 / c_sq)


def _total_mach_sq(r: float, rho: float, inlet: InletData) -> float:
    c_sq = inlet.gamma * inlet.a0 * rho ** (inlet.gamma - 1.0)
    return ((inlet.m1 / (r * rho)) ** 2 + (inlet.m2 / r) ** 2) / c_sq


def find_sonic_radius(profile: BackgroundProfile) -> Optional[float]:
    """Radius where ``|M|^2 = 1``, or ``None`` if the profile never crosses.

    The crossing is bracketed by nodes and refined by bisection; off-node
    states come from a single RK4 step out of the left bracketing node.
    """
    inlet = profile.inlet
    g = mach_profile(profile).total_sq - 1.0
    on_node = np.flatnonzero(g == 0.0)
    strict = np.flatnonzero(g[:-1] * g[1:] < 0.0)
    n_cross = on_node.size + strict.size
    if n_cross == 0:
        return None
    if n_cross > 1:
        raise MultipleCrossings(f"{n_cross} sign changes of |M|^2 - 1")
    if on_node.size:
        return float(profile.r_nodes[on_node[0]])

    k = int(strict[0])
    r_k = profile.r_nodes[k]
    rho_k = profile.rho[k]
    re_k = r_k * profile.e_field[k]

    def g_at(s: float) -> float:
        if s == 0.0:
            return g[k]
        rho_s, _ = _rk4_step(r_k, rho_k, re_k, s, inlet)
        return _total_mach_sq(r_k + s, rho_s, inlet) - 1.0

    lo, hi = 0.0, profile.r_nodes[k + 1] - r_k
    g_lo = g[k]
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g_mid = g_at(mid)
        if abs(g_mid) <= SONIC_TOL or hi - lo < 1e-15:
            break
        if np.sign(g_mid) == np.sign(g_lo):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return float(r_k + mid)


def check_decay_bound(profile: BackgroundProfile) -> float:
    """Largest excess of ``f(r) = |M|^2(r)`` over ``r0^2 f(r0) / r^2``."""
    f = mach_profile(profile).total_sq
    r = profile.r_nodes
    bound = r[0] ** 2 * f[0] / r**2
    return float(np.max(f - bound))


def mach_derivatives(profile: BackgroundProfile) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form r-derivatives of ``M1^2``, ``M2^2`` and ``|M|^2`` at the nodes."""
    g = profile.gamma
    mach = mach_profile(profile)
    m1, m2 = mach.m1_sq, mach.m2_sq
    r = profile.r_nodes
    c_sq = profile.c_sq
    er_c = profile.e_field * r / c_sq
    denom = r * (1.0 - m1)
    d_m1 = -m1 / denom * ((g - 1) * m1 + (g + 1) * m2 + (g + 1) * er_c + 2)
    d_m2 = -m2 / denom * ((g - 3) * m1 + (g - 1) * m2 + (g - 1) * er_c + 2)
    tot = m1 + m2
    d_tot = -tot / denom * ((g - 1) * tot + 2) - ((g + 1) * m1 + (g - 1) * m2) * profile.e_field / (
        c_sq * (1.0 - m1)
    )
    return d_m1, d_m2, d_tot


def cross_check_mach_ode(profile: BackgroundProfile) -> float:
    """Max mismatch between central differences and the closed-form derivatives."""
    if profile.n_nodes < 3:
        raise NotEnoughNodes("need at least three nodes for central differences")
    r = profile.r_nodes
    h = r[1] - r[0]
    mach = mach_profile(profile)
    exact = mach_derivatives(profile)
    worst = 0.0
    for series, d_exact in zip((mach.m1_sq, mach.m2_sq, mach.total_sq), exact):
        fd = (series[2:] - series[:-2]) / (2.0 * h)
        worst = max(worst, float(np.max(np.abs(fd - d_exact[1:-1]))))
    return worst


def poisson_consistency(profile: BackgroundProfile) -> float:
    """Interior sup of the centered residual of ``(r E)' - r (rho - b0)``."""
    r = profile.r_nodes
    h = r[1] - r[0]
    re = r * profile.e_field
    fd = (re[2:] - re[:-2]) / (2.0 * h)
    return float(np.max(np.abs(fd - r[1:-1] * (profile.rho[1:-1] - profile.inlet.b0))))


def resample(profile: BackgroundProfile, stride: int) -> BackgroundProfile:
    """Every ``stride``-th node of a profile (used to put it on a coarser grid)."""
    from dataclasses import replace

    if (profile.n_nodes - 1) % stride:
        raise ValueError("stride must divide the number of intervals")
    sl = slice(None, None, stride)
    return replace(
        profile,
        r_nodes=profile.r_nodes[sl],
        rho=profile.rho[sl],
        u1=profile.u1[sl],
        u2=profile.u2[sl],
        e_field=profile.e_field[sl],
        phi=profile.phi[sl],
    )
