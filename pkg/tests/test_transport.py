import math

import numpy as np
import pytest

from ep_annulus.boundary import BoundaryPerturbation, CosPi, IonPerturbation, smooth_test_boundary
from ep_annulus.errors import DegenerateRadialVelocity, VacuumState
from ep_annulus.grid import bilinear, d_z
from ep_annulus.section import DeviationField
from ep_annulus.transport import eval_g_terms, solve_transport, trace_characteristic

from conftest import SUBSONIC, background
from oracles import characteristic_foot

STARTS = [(2.0, 0.3), (1.7, -0.6), (1.33, 0.9), (2.0, 0.999)]


def _slope_oracle(slope, grid):
    return lambda r, z: float(bilinear(slope, grid, np.array(r), np.array(z)))


def test_horizontal_characteristics(bg33):
    g = bg33.grid
    R, Z = g.mesh()
    U1 = bg33.col("u1") + 0 * R
    foot = trace_characteristic(U1, np.zeros(g.shape), g, R.ravel(), Z.ravel())
    assert np.array_equal(foot.z0, Z.ravel())


def test_walls_invariant(bg33):
    g = bg33.grid
    R, Z = g.mesh()
    W3 = 0.01 * np.sin(np.pi * Z) * R
    U1 = bg33.col("u1") + 0 * R
    foot = trace_characteristic(U1, W3, g, [2.0, 1.5], [1.0, -1.0])
    assert foot.z0.tolist() == [1.0, -1.0]


@pytest.mark.parametrize("n", [33, 65])
def test_feet_match_fine_oracle(n):
    bg = background(SUBSONIC, n)
    g = bg.grid
    R, Z = g.mesh()
    W3 = 0.005 * np.sin(np.pi * Z) * (1 + R)
    U1 = bg.col("u1") + 0 * R
    oracle = _slope_oracle(W3 / U1, g)
    for r, z in STARTS:
        got = trace_characteristic(U1, W3, g, r, z).z0[0]
        assert abs(got - characteristic_foot(oracle, r, z, g.r0)) <= 1e-8


def test_strong_slope_converges_at_fourth_order():
    errs = []
    for n in (33, 65):
        bg = background(SUBSONIC, n)
        g = bg.grid
        R, Z = g.mesh()
        W3 = 0.2 * Z * (1 + R**2)  # bilinear-exact in x3: only the RK4 error remains
        U1 = bg.col("u1") + 0 * R
        oracle = _slope_oracle(W3 / U1, g)
        got = trace_characteristic(U1, W3, g, 2.0, 0.3).z0[0]
        errs.append(abs(got - characteristic_foot(oracle, 2.0, 0.3, g.r0)))
    assert math.log2(errs[0] / errs[1]) >= 3.5


def test_degenerate_velocity(bg33):
    g = bg33.grid
    U1 = np.zeros(g.shape)
    with pytest.raises(DegenerateRadialVelocity):
        trace_characteristic(U1, np.zeros(g.shape), g, 2.0, 0.0)


def test_straight_transport(bg33):
    g = bg33.grid
    R, Z = g.mesh()
    eps = 1e-2
    b = BoundaryPerturbation(eps=eps, a_en=CosPi((0.0, 1.0)), u2_en=CosPi((0.2, 0.0, 0.7)), k_en=CosPi((0.0, 0.5)))
    W2, W4, W5 = solve_transport(np.zeros(g.shape), np.zeros(g.shape), bg33, b)
    assert np.max(np.abs(W4 - eps * np.cos(np.pi * Z))) <= 1e-15
    assert np.max(np.abs(W2 - eps * g.r0 * b.u2_en(Z) / R)) <= 1e-15
    assert np.max(np.abs(W5 - eps * 0.5 * np.cos(np.pi * Z))) <= 1e-15


def test_curved_transport_values(bg65):
    g = bg65.grid
    R, Z = g.mesh()
    W1 = 0.002 * np.cos(np.pi * Z) * R
    W3 = 0.005 * np.sin(np.pi * Z) * (1 + R)
    b = smooth_test_boundary(1e-2)
    W2, W4, W5 = solve_transport(W1, W3, bg65, b)
    oracle = _slope_oracle(W3 / (bg65.col("u1") + W1), g)
    for i, j in [(64, 20), (40, 50), (10, 33), (64, 1)]:
        z0 = characteristic_foot(oracle, g.r[i], g.z[j], g.r0)
        assert abs(W4[i, j] - b.eps * b.a_en(np.array([z0]))[0]) <= 1e-7
        assert abs(R[i, j] * W2[i, j] - g.r0 * b.eps * b.u2_en(np.array([z0]))[0]) <= 1e-7


def test_transport_linear_in_eps(bg33):
    g = bg33.grid
    R, Z = g.mesh()
    W1 = 0.002 * np.cos(np.pi * Z)
    W3 = 0.004 * np.sin(np.pi * Z) * R
    a = solve_transport(W1, W3, bg33, smooth_test_boundary(1e-3))
    b = solve_transport(W1, W3, bg33, smooth_test_boundary(2e-3))
    for x, y in zip(a, b):
        assert np.max(np.abs(2 * x - y)) <= 1e-18


def _invariant_spread(n):
    bg = background(SUBSONIC, n)
    g = bg.grid
    R, Z = g.mesh()
    W3 = 0.005 * np.sin(np.pi * Z) * (1 + R)
    W1 = np.zeros(g.shape)
    b = smooth_test_boundary(1e-2)
    W2, W4, W5 = solve_transport(W1, W3, bg, b)
    foot = trace_characteristic(bg.col("u1") + W1, W3, g, 2.0, 0.4, record=True)
    rs = np.array([p[0][0] for p in foot.path])
    zs = np.array([p[1][0] for p in foot.path])
    pick = np.linspace(1, len(rs) - 2, 10).astype(int)
    return [float(np.ptp(bilinear(f, g, rs[pick], zs[pick]))) for f in (R * W2, W4, W5)], g.hr


def test_invariants_along_characteristic():
    (coarse, h), (fine, _) = _invariant_spread(33), _invariant_spread(65)
    for c, f in zip(coarse, fine):
        # bilinear sampling error of eps * O(1) profiles with O(pi^2) curvature
        assert c <= 1e-2 * np.pi**2 * h**2
        assert c / f >= 3.0


def _wall_slopes(n, eps=1e-2):
    bg = background(SUBSONIC, n)
    g = bg.grid
    R, Z = g.mesh()
    b = smooth_test_boundary(eps)
    Ws = DeviationField(0.01 * np.cos(np.pi * Z), np.zeros(g.shape), 0.01 * np.sin(np.pi * Z) * R,
                        np.zeros(g.shape), np.zeros(g.shape), 0.01 * np.cos(np.pi * Z) * (R - 1))
    W2, W4, W5 = solve_transport(Ws.W1, Ws.W3, bg, b)
    G = eval_g_terms(Ws, W2, W4, W5, bg, b)
    walls = [0, -1]
    slopes = [float(np.max(np.abs(d_z(f, g)[:, walls]))) for f in (W2, W4, W5, G.G1, G.G4)]
    exact = [float(np.max(np.abs(G.G2[:, walls]))), float(np.max(np.abs(G.G3[:, walls])))]
    return np.array(slopes), exact


def test_wall_compatibility_of_outputs():
    """Wall values vanish exactly; one-sided wall slopes of even outputs are O(h^2)."""
    coarse, exact = _wall_slopes(33)
    fine, _ = _wall_slopes(65)
    assert exact[0] == 0.0 and exact[1] <= 1e-16
    assert np.all(coarse / fine >= 3.0), coarse / fine
    assert np.all(fine <= 1e-2 * (2 / 64) ** 2 * 2 * np.pi**3)


def _g_terms_reference(Ws, W2, W4, W5, bg, b):
    """Node-by-node scalar evaluation of the four source terms."""
    g, a0, k0 = bg.gamma, bg.a0, bg.k0
    grid = bg.grid
    nr, nz = grid.shape
    hz = grid.hz
    out = np.zeros((4, nr, nz))

    def dz_even(f, i, j):
        if j == 0 or j == nz - 1:
            return 0.0
        return (f[i, j + 1] - f[i, j - 1]) / (2 * hz)

    for i in range(nr):
        r = grid.r[i]
        rho, u1, u2, phi = bg.rho[i], bg.u1[i], bg.u2[i], bg.phi[i]
        c2 = g * a0 * rho ** (g - 1)
        for j in range(nz):
            w1, w3, w6 = Ws.W1[i, j], Ws.W3[i, j], Ws.W6[i, j]
            w2, w4, w5 = W2[i, j], W4[i, j], W5[i, j]
            q = (u1 + w1) ** 2 + (u2 + w2) ** 2 + w3**2
            h = ((g - 1) / (g * (a0 + w4)) * (k0 + w5 + phi + w6 - q / 2)) ** (1 / (g - 1))
            lin = (-rho / ((g - 1) * a0) * w4 + rho / c2 * (w5 + w6) - rho * (u1 * w1 + u2 * w2) / c2)
            nonlin = h - rho - lin
            out[0, i, j] = -(h - rho) * w1 - nonlin * u1
            out[1, i, j] = ((u2 + w2) * dz_even(W2, i, j) + h ** (g - 1) / (g - 1) * dz_even(W4, i, j)
                            - dz_even(W5, i, j)) / (u1 + w1)
            out[2, i, j] = -(h - rho) * w3
            out[3, i, j] = nonlin - b.eps * b.b_tilde(np.array([r]), np.array([grid.z[j]]))[0]
    return out


def test_g_terms_dual_implementation(bg33):
    g = bg33.grid
    R, Z = g.mesh()
    rng = np.random.default_rng(11)
    b = smooth_test_boundary(1e-2)
    Ws = DeviationField(
        0.01 * np.cos(np.pi * Z) * R,
        np.zeros(g.shape),
        0.01 * np.sin(np.pi * Z),
        np.zeros(g.shape),
        np.zeros(g.shape),
        0.01 * np.cos(np.pi * Z) * (R - 1),
    )
    W2 = 0.01 * rng.standard_normal(g.shape)
    W4 = 0.01 * rng.standard_normal(g.shape)
    W5 = 0.01 * rng.standard_normal(g.shape)
    got = np.array(eval_g_terms(Ws, W2, W4, W5, bg33, b))
    ref = _g_terms_reference(Ws, W2, W4, W5, bg33, b)
    for k in range(4):
        scale = max(1.0, np.max(np.abs(ref[k])))
        assert np.max(np.abs(got[k] - ref[k])) <= 1e-12 * scale, k


def test_g_terms_vanish_without_data(bg33):
    g = bg33.grid
    z = np.zeros(g.shape)
    G = eval_g_terms(DeviationField.zeros(g), z, z, z, bg33, BoundaryPerturbation(eps=0.0))
    for x in G:
        assert np.max(np.abs(x)) <= 1e-14


def test_g4_is_ion_perturbation_only(bg33):
    g = bg33.grid
    R, Z = g.mesh()
    z = np.zeros(g.shape)
    b = BoundaryPerturbation(eps=0.1, b_tilde=IonPerturbation(CosPi((0.0, 1.0)), (1.0, 0.0)))
    G1, G2, G3, G4 = eval_g_terms(DeviationField.zeros(g), z, z, z, bg33, b)
    assert np.max(np.abs(G4 + 0.1 * R * np.cos(np.pi * Z))) <= 1e-14
    assert max(np.max(np.abs(G1)), np.max(np.abs(G2)), np.max(np.abs(G3))) <= 1e-14


def test_vacuum_guard(bg33):
    g = bg33.grid
    z = np.zeros(g.shape)
    Ws = DeviationField.zeros(g)
    with pytest.raises(VacuumState):
        eval_g_terms(Ws, z, z, z - 100.0, bg33, BoundaryPerturbation(eps=0.0))
