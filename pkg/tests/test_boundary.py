import numpy as np
import pytest

from ep_annulus.boundary import (
    BoundaryPerturbation,
    CosPi,
    FuncProfile,
    IonPerturbation,
    Poly,
    SinPi,
    Table,
    Zero,
    profile_from_dict,
    smooth_test_boundary,
)
from ep_annulus.errors import CompatibilityError, ConfigError

X = np.linspace(-1, 1, 41)


def test_cospi_derivatives():
    p = CosPi((0.3, 1.0, -0.5))
    assert np.allclose(p(X), 0.3 + np.cos(np.pi * X) - 0.5 * np.cos(2 * np.pi * X), atol=1e-15)
    assert np.allclose(p(X, 1), -np.pi * np.sin(np.pi * X) + np.pi * np.sin(2 * np.pi * X), atol=1e-13)
    assert np.allclose(p(X, 2), -np.pi**2 * np.cos(np.pi * X) + 2 * np.pi**2 * np.cos(2 * np.pi * X), atol=1e-12)


def test_sinpi_and_poly():
    s = SinPi((0.0, 2.0))
    assert np.allclose(s(X, 1), 2 * np.pi * np.cos(np.pi * X), atol=1e-13)
    p = Poly((1.0, 0.0))
    assert np.array_equal(p(X), X)
    assert np.array_equal(p(X, 1), np.ones_like(X))


def test_table_spline():
    x = np.linspace(-1, 1, 9)
    t = Table(tuple(x), tuple(np.cos(np.pi * x)), (0.0, 0.0))
    assert np.max(np.abs(t(X) - np.cos(np.pi * X))) < 5e-3
    assert abs(t(np.array([1.0]), 1)[0]) <= 1e-14
    with pytest.raises(ConfigError):
        Table((0.0, 1.0), (0.0, 1.0))


def test_profile_dict_round_trip():
    for p in (Zero(), CosPi((0.0, 1.0)), SinPi((0.0, 0.0, 1.0)), Poly((1.0, 0.0, -1.0))):
        assert profile_from_dict(p.to_dict()) == p
    with pytest.raises(ConfigError):
        profile_from_dict({"kind": "bessel"})
    with pytest.raises(ConfigError):
        profile_from_dict({"kind": "cospi", "coeffs": []})
    with pytest.raises(ConfigError):
        FuncProfile((np.sin,)).to_dict()


def test_boundary_round_trip():
    b = smooth_test_boundary(1e-3)
    assert BoundaryPerturbation.from_dict(b.to_dict()) == b
    with pytest.raises(ConfigError):
        BoundaryPerturbation.from_dict({"eps": 0.1, "u4_en": {"kind": "zero"}})


def test_smooth_boundary_is_compatible():
    assert smooth_test_boundary(0.1).compatibility_violations() == []


def test_x3_inflow_violates_compatibility():
    b = BoundaryPerturbation(eps=0.1, u3_en=Poly((1.0, 0.0)))
    v = b.compatibility_violations()
    assert "u3_en(1) != 0" in v and "u3_en(-1) != 0" in v
    with pytest.raises(CompatibilityError):
        b.check_compatibility()


def test_slope_conditions():
    b = BoundaryPerturbation(eps=0.1, a_en=SinPi((0.0, 1.0)))
    assert any(s.startswith("a_en'") for s in b.compatibility_violations())
    b = BoundaryPerturbation(eps=0.1, u3_en=SinPi((0.0, 0.0, 1.0)))
    assert b.compatibility_violations() == []


def test_ion_perturbation():
    b = IonPerturbation(CosPi((0.0, 1.0)), (2.0, 1.0))
    r = np.array([1.0, 1.5])
    z = np.array([0.0, 1.0])
    assert np.allclose(b(r, z), (2 * r + 1) * np.cos(np.pi * z))
    assert IonPerturbation()(r, z).tolist() == [0.0, 0.0]
