"""Polytropic gas relations in Bernoulli variables."""

from __future__ import annotations

import numpy as np

from .errors import VacuumState

ENTHALPY_FLOOR = 1e-10


def enthalpy_argument(K, Phi, speed_sq):
    """``K + Phi - |U|^2 / 2``, i.e. ``c^2 / (gamma - 1)``."""
    return np.asarray(K) + np.asarray(Phi) - 0.5 * np.asarray(speed_sq)


def bernoulli_density(A, K, Phi, speed_sq, gamma: float, floor: float = 0.0):
    """Density from entropy, Bernoulli function, potential and speed.

    ``rho = ((gamma - 1) / (gamma A) * (K + Phi - |U|^2 / 2))^(1 / (gamma - 1))``.
    Raises :class:`VacuumState` where the bracket is not above ``floor``.
    """
    arg = enthalpy_argument(K, Phi, speed_sq)
    if np.any(arg <= floor):
        raise VacuumState(f"K + Phi - |U|^2/2 reaches {float(np.min(arg)):.3g}")
    if np.any(np.asarray(A) <= 0):
        raise VacuumState("entropy A must be positive")
    return ((gamma - 1.0) / (gamma * np.asarray(A)) * arg) ** (1.0 / (gamma - 1.0))


def sound_speed_sq(K, Phi, speed_sq, gamma: float):
    return (gamma - 1.0) * enthalpy_argument(K, Phi, speed_sq)
