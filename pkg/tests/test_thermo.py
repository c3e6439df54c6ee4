import numpy as np
import pytest

from ep_annulus.errors import VacuumState
from ep_annulus.thermo import bernoulli_density, enthalpy_argument, sound_speed_sq


def test_gamma_two_example():
    # K + Phi - |U|^2/2 = 2
    assert bernoulli_density(1.0, 2.5, 0.0, 1.0, 2.0) == pytest.approx(1.0, abs=1e-15)


def test_gamma_five_thirds_example():
    assert bernoulli_density(1.0, 2.5, 0.0, 0.0, 5 / 3) == pytest.approx(1.0, abs=1e-14)


def test_vacuum():
    with pytest.raises(VacuumState):
        bernoulli_density(1.0, 1.0, 0.0, 2.0, 2.0)
    with pytest.raises(VacuumState):
        bernoulli_density(0.0, 3.0, 0.0, 0.0, 2.0)


def test_consistency_with_sound_speed():
    rng = np.random.default_rng(5)
    A = rng.uniform(0.5, 2, 20)
    K = rng.uniform(2, 4, 20)
    q = rng.uniform(0, 1, 20)
    g = 1.4
    rho = bernoulli_density(A, K, 0.1, q, g)
    # c^2 = gamma A rho^(gamma - 1) must equal (gamma - 1)(K + Phi - q/2)
    assert np.allclose(g * A * rho ** (g - 1), sound_speed_sq(K, 0.1, q, g), rtol=1e-13)
    assert np.allclose(enthalpy_argument(K, 0.1, q), K + 0.1 - q / 2)
