"""Background flow sampled on the (r, x3) grid and the deviation fields."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Iterator

import numpy as np

from .background import BackgroundProfile, InletData, integrate_background, resample
from .grid import Grid2D, d_r, d_z
from .thermo import bernoulli_density, sound_speed_sq

MIN_BACKGROUND_NODES = 2049


@dataclass(frozen=True)
class AxisymBackground:
    """Radial background on the nodes of ``grid`` (1D arrays over r).

    ``rho`` is the density recomputed from the Bernoulli law with the inlet
    constants, which is what the perturbation terms linearize around.
    """

    grid: Grid2D
    inlet: InletData
    profile: BackgroundProfile
    u1: np.ndarray
    u2: np.ndarray
    phi: np.ndarray
    rho: np.ndarray
    c_sq: np.ndarray
    k0: float

    @classmethod
    def from_inlet(cls, inlet: InletData, grid: Grid2D, min_nodes: int = MIN_BACKGROUND_NODES):
        if abs(inlet.r0 - grid.r0) > 1e-14 or abs(inlet.r1 - grid.r1) > 1e-14:
            raise ValueError("grid and inlet radii differ")
        stride = max(1, -(-(min_nodes - 1) // (grid.nr - 1)))
        fine = integrate_background(inlet, (grid.nr - 1) * stride + 1)
        return cls.from_profile(resample(fine, stride), grid)

    @classmethod
    def from_profile(cls, profile: BackgroundProfile, grid: Grid2D):
        if profile.n_nodes != grid.nr:
            raise ValueError("profile must be sampled on the grid radii")
        inlet = profile.inlet
        speed_sq = profile.u1**2 + profile.u2**2
        k0 = inlet.k0
        rho = bernoulli_density(inlet.a0, k0, profile.phi, speed_sq, inlet.gamma)
        c_sq = sound_speed_sq(k0, profile.phi, speed_sq, inlet.gamma)
        return cls(grid, inlet, profile, profile.u1, profile.u2, profile.phi, rho, c_sq, k0)

    @property
    def gamma(self) -> float:
        return self.inlet.gamma

    @property
    def a0(self) -> float:
        return self.inlet.a0

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    @property
    def m1_sq(self) -> np.ndarray:
        return self.u1**2 / self.c_sq

    def col(self, name: str) -> np.ndarray:
        """A 1D background array as an (nr, 1) column for broadcasting."""
        return getattr(self, name)[:, None]


@dataclass
class DeviationField:
    W1: np.ndarray
    W2: np.ndarray
    W3: np.ndarray
    W4: np.ndarray
    W5: np.ndarray
    W6: np.ndarray

    @classmethod
    def zeros(cls, grid: Grid2D) -> "DeviationField":
        return cls(*(np.zeros(grid.shape) for _ in range(6)))

    def __iter__(self) -> Iterator[np.ndarray]:
        return (getattr(self, f.name) for f in fields(self))

    def __sub__(self, other: "DeviationField") -> "DeviationField":
        return DeviationField(*(a - b for a, b in zip(self, other)))

    def sup_norm(self) -> float:
        return max(float(np.max(np.abs(w))) for w in self)

    def c1_norm(self, grid: Grid2D) -> float:
        """Sup of values plus first differences, maximised over components."""
        return max(
            float(np.max(np.abs(w)) + np.max(np.abs(d_r(w, grid))) + np.max(np.abs(d_z(w, grid))))
            for w in self
        )

    def wall_compatibility(self, grid: Grid2D) -> dict[str, float]:
        """Largest wall violations of the compatibility conditions."""
        walls = [0, -1]
        out = {"W3": float(np.max(np.abs(self.W3[:, walls])))}
        for name in ("W1", "W2", "W4", "W5", "W6"):
            out[f"d3{name}"] = float(np.max(np.abs(d_z(getattr(self, name), grid)[:, walls])))
        return out
