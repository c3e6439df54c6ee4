"""Independent reference computations used to freeze expected values.

Nothing here imports the solver modules except for plain data containers,
so a bug in the package cannot leak into its own reference values.  Run the
module directly to print the values that the tests freeze.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp


def radial_rhs(inlet):
    g, a0, b0 = inlet.gamma, inlet.a0, inlet.b0
    m1 = inlet.r0 * inlet.rho0 * inlet.u10
    m2 = inlet.r0 * inlet.u20

    def rhs(r, y):
        rho, re = y
        u1, u2 = m1 / (r * rho), m2 / r
        c2 = g * a0 * rho ** (g - 1)
        e = re / r
        return np.array([rho * (u1**2 + u2**2 + e * r) / (r * (c2 - u1**2)), r * (rho - b0)])

    return rhs


def rk4_fixed(inlet, n):
    """Plain RK4 on ``n`` nodes; returns ``(r, rho, rE)``."""
    f = radial_rhs(inlet)
    r = np.linspace(inlet.r0, inlet.r1, n)
    h = r[1] - r[0]
    y = np.empty((n, 2))
    y[0] = (inlet.rho0, inlet.r0 * inlet.e0)
    for i in range(n - 1):
        k1 = f(r[i], y[i])
        k2 = f(r[i] + h / 2, y[i] + h / 2 * k1)
        k3 = f(r[i] + h / 2, y[i] + h / 2 * k2)
        k4 = f(r[i] + h, y[i] + h * k3)
        y[i + 1] = y[i] + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return r, y[:, 0], y[:, 1]


def richardson_endpoint(inlet, n):
    """Step-halving Richardson extrapolation of ``(rho, rE)`` at ``r1``."""
    _, rho_h, re_h = rk4_fixed(inlet, n)
    _, rho_h2, re_h2 = rk4_fixed(inlet, 2 * n - 1)
    return (16 * rho_h2[-1] - rho_h[-1]) / 15, (16 * re_h2[-1] - re_h[-1]) / 15


def dense_solution(inlet, r_eval=None):
    """Adaptive high-order reference (DOP853, tight tolerances)."""
    sol = solve_ivp(radial_rhs(inlet), (inlet.r0, inlet.r1), [inlet.rho0, inlet.r0 * inlet.e0],
                    method="DOP853", rtol=1e-13, atol=1e-15, dense_output=True, t_eval=r_eval)
    return sol


def total_mach_sq(inlet, r, rho):
    g = inlet.gamma
    m1 = inlet.r0 * inlet.rho0 * inlet.u10
    m2 = inlet.r0 * inlet.u20
    c2 = g * inlet.a0 * rho ** (g - 1)
    return ((m1 / (r * rho)) ** 2 + (m2 / r) ** 2) / c2


def sonic_radius_dense(inlet, n=100_001):
    """Bisection for ``|M|^2 = 1`` on a dense reference profile."""
    sol = dense_solution(inlet)
    r = np.linspace(inlet.r0, inlet.r1, n)
    rho = sol.sol(r)[0]
    g = total_mach_sq(inlet, r, rho) - 1
    k = np.flatnonzero(np.sign(g[:-1]) != np.sign(g[1:]))
    if k.size == 0:
        return None
    lo, hi = r[k[0]], r[k[0] + 1]

    def gfun(x):
        return total_mach_sq(inlet, x, sol.sol(x)[0]) - 1

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.sign(gfun(mid)) == np.sign(gfun(lo)):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def characteristic_foot(slope_fn, r_start, z_start, r0, n_steps=20000):
    """Fine-step RK4 for ``dz/dr = slope_fn(r, z)`` from ``r_start`` back to ``r0``."""
    h = (r_start - r0) / n_steps
    r, z = r_start, z_start
    for _ in range(n_steps):
        k1 = slope_fn(r, z)
        k2 = slope_fn(r - h / 2, z - h / 2 * k1)
        k3 = slope_fn(r - h / 2, z - h / 2 * k2)
        k4 = slope_fn(r - h, z - h * k3)
        z = z - h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        r -= h
    return z


if __name__ == "__main__":
    from ep_annulus.background import InletData

    ex = InletData(gamma=5 / 3, rho0=1.0, u10=0.5, u20=0.5, a0=1.0, e0=0.1, b0=0.5)
    rho_r, re_r = richardson_endpoint(ex, 1001)
    ref = dense_solution(ex).y[:, -1]
    print("gamma=5/3 subsonic endpoint  richardson", repr(rho_r), "dop853", repr(ref[0]))
    print("  |M|^2(r1)", repr(total_mach_sq(ex, ex.r1, rho_r)))
    tr = InletData(gamma=5 / 3, rho0=1.0, u10=0.8, u20=1.5, a0=1.0, e0=0.1, b0=0.5, r1=2.0)
    print("transonic r_c (r1=2)", repr(sonic_radius_dense(tr)))
    tr5 = InletData(gamma=5 / 3, rho0=1.0, u10=0.8, u20=1.5, a0=1.0, e0=0.1, b0=0.5, r1=5.0)
    print("transonic r_c (r1=5)", repr(sonic_radius_dense(tr5)))
    sol = dense_solution(tr, r_eval=np.array([1.5]))
    print("transonic rho(1.5)", repr(sol.y[0, 0]), "M1^2(1.5)",
          repr((tr.r0 * tr.rho0 * tr.u10 / (1.5 * sol.y[0, 0])) ** 2 / (tr.gamma * sol.y[0, 0] ** (tr.gamma - 1))))
