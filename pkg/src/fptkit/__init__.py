"""First-passage times of Brownian motion to curved boundaries.

The density of ``tau = inf{t > 0: W_t <= b(t)}`` is obtained by solving
Volterra integral equations, and checked against closed forms, Fredholm-type
identities, transform laws and Monte Carlo simulation.
"""
from ._backend import BACKEND
from .boundary import Boundary, TransformParams, apply_transform, builtin, from_spec, transform_density
from .errors import AccuracyError, DomainError, FptError, PoleError, RangeError
from .grid import FptSolution, TimeGrid
from .montecarlo import McEstimate, mc_fpt
from .volterra import KernelSpec, residual_family, solve_first_kind, solve_second_kind

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Boundary", "TransformParams", "apply_transform", "builtin", "from_spec",
    "transform_density", "AccuracyError", "DomainError", "FptError", "PoleError", "RangeError",
    "FptSolution", "TimeGrid", "McEstimate", "mc_fpt", "KernelSpec", "residual_family",
    "solve_first_kind", "solve_second_kind",
]
