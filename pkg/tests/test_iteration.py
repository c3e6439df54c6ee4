import numpy as np
import pytest

from ep_annulus.boundary import BoundaryPerturbation, smooth_test_boundary
from ep_annulus.errors import DegenerateRadialVelocity, MaxIterExceeded, SolverError, TrustRegionExceeded
from ep_annulus.iteration import (
    RESIDUAL_NAMES,
    SolveOptions,
    apply_map,
    default_delta_guard,
    fixed_point_solve,
    full_residual,
    residual_fields,
    streamline_invariants,
)
from ep_annulus.section import DeviationField

from conftest import TRANSONIC, background


def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(tol=0.0)
    with pytest.raises(ValueError):
        SolveOptions(delta_guard=-1.0)
    assert SolveOptions().guard_for(1e-3) == pytest.approx(0.1)
    assert default_delta_guard(0.0) == 1.0


def test_zero_data_is_exact_fixed_point(bg33):
    b = smooth_test_boundary(0.0)
    W = apply_map(DeviationField.zeros(bg33.grid), bg33, b)
    assert W.sup_norm() == 0.0
    rep = fixed_point_solve(bg33, b)
    assert rep.iterations == 1 and rep.field.sup_norm() == 0.0


def test_one_sweep_scales_with_eps(bg33):
    zero = DeviationField.zeros(bg33.grid)
    c = [apply_map(zero, bg33, smooth_test_boundary(e)).sup_norm() / e for e in (1e-3, 5e-4)]
    assert abs(c[0] / c[1] - 1) <= 0.01


def test_trust_region_guard(bg33):
    g = bg33.grid
    W = DeviationField.zeros(g)
    W.W1 = np.full(g.shape, 0.2)
    with pytest.raises(TrustRegionExceeded):
        apply_map(W, bg33, smooth_test_boundary(0.5), delta_guard=default_delta_guard(1e-3))


def test_subsonic_solve_linear_in_eps(bg33):
    reps = [fixed_point_solve(bg33, smooth_test_boundary(e)) for e in (1e-3, 5e-4)]
    for rep in reps:
        assert rep.converged and rep.increments[-1] <= 1e-10
        assert rep.contraction_ratio < 0.5
        assert rep.field.sup_norm() <= 100 * 1e-3
    scaled = [reps[0].field.sup_norm() / 1e-3, reps[1].field.sup_norm() / 5e-4]
    assert abs(scaled[0] / scaled[1] - 1) <= 0.1
    # first-step contraction ratio halves with eps
    assert 1.5 <= reps[0].ratios[0] / reps[1].ratios[0] <= 2.5


def test_converged_field_is_wall_compatible(bg33):
    rep = fixed_point_solve(bg33, smooth_test_boundary(1e-3))
    walls = rep.field.wall_compatibility(bg33.grid)
    assert walls["W3"] <= 1e-15
    for key, v in walls.items():
        assert v <= 1e-3, key


def test_transonic_background_converges():
    bg = background(TRANSONIC, 33)
    rep = fixed_point_solve(bg, smooth_test_boundary(1e-3))
    assert rep.contraction_ratio < 0.5
    assert rep.field.sup_norm() <= 0.1


def test_large_eps_fails_with_solver_error(bg33):
    # the first sweep drives the radial velocity negative before any contraction test
    with pytest.raises(SolverError) as info:
        fixed_point_solve(bg33, smooth_test_boundary(0.5))
    assert isinstance(info.value, DegenerateRadialVelocity)


def test_max_iter(bg33):
    with pytest.raises(MaxIterExceeded):
        fixed_point_solve(bg33, smooth_test_boundary(1e-3), SolveOptions(max_iter=2))


def test_grid_mismatch_rejected(bg33, bg65):
    with pytest.raises(ValueError):
        fixed_point_solve(bg33, smooth_test_boundary(1e-3), SolveOptions(grid=bg65.grid))


def test_background_residual_second_order(bg33, bg65):
    zero = BoundaryPerturbation(eps=0.0)
    a = full_residual(DeviationField.zeros(bg33.grid), bg33, zero)
    b = full_residual(DeviationField.zeros(bg65.grid), bg65, zero)
    assert a.names == RESIDUAL_NAMES
    assert b.sup[0] <= 1e-8  # continuity: r rho U1 is constant by construction
    for k in (1, 2, 5):
        assert 3.0 <= a.sup[k] / b.sup[k] <= 5.5
    assert np.all(b.sup[[3, 4]] <= 1e-12)


def test_bump_isolated_in_momentum(bg65):
    g = bg65.grid
    R, Z = g.mesh()
    b = BoundaryPerturbation(eps=0.0)
    W = DeviationField.zeros(g)
    ic, jc = 30, 40
    W.W3 = 1e-3 * np.exp(-(((R - g.r[ic]) / (2 * g.hr)) ** 2 + ((Z - g.z[jc]) / (2 * g.hz)) ** 2))
    base = residual_fields(DeviationField.zeros(g), bg65, b)
    bumped = residual_fields(W, bg65, b)
    diff = np.abs(bumped["momentum_3"] - base["momentum_3"])
    i, j = np.unravel_index(np.argmax(diff), diff.shape)
    assert abs(i - ic) <= 3 and abs(j - jc) <= 3
    far = (np.abs(R - g.r[ic]) > 20 * g.hr) | (np.abs(Z - g.z[jc]) > 20 * g.hz)
    assert np.max(diff[far]) <= 1e-9 * np.max(diff)
    # the azimuthal balance sees U3 only through the density when U2 is x3-independent
    assert np.max(np.abs(bumped["momentum_theta"] - base["momentum_theta"])) <= 1e-6 * np.max(diff)


def test_streamline_invariants(bg33):
    rep = fixed_point_solve(bg33, smooth_test_boundary(1e-3))
    inv = streamline_invariants(rep.field, bg33)
    assert inv.max_variation <= 1e-3 * (bg33.grid.hr**2 + 1e-10) * 10
    assert len(inv.seeds) == 20
