"""Steady Euler-Poisson flow in a concentric cylinder.

Radial background flows, the axisymmetric transport / coupled-elliptic
fixed-point solver and residual checks of the 3D decomposition.
"""

from .background import InletData, find_sonic_radius, integrate_background
from .boundary import BoundaryPerturbation, smooth_test_boundary
from .grid import Grid2D
from .iteration import SolveOptions, fixed_point_solve, full_residual
from .section import AxisymBackground, DeviationField

__version__ = "0.1.0"

__all__ = [
    "AxisymBackground",
    "BoundaryPerturbation",
    "DeviationField",
    "Grid2D",
    "InletData",
    "SolveOptions",
    "find_sonic_radius",
    "fixed_point_solve",
    "full_residual",
    "integrate_background",
    "smooth_test_boundary",
]
