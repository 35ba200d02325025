"""Modal-centric field inversion for modified viscous Burgers equations.

Forward solvers, snapshot POD, adjoint sensitivities of POD modes with
respect to distributed design parameters, and bound-constrained
mode-matching optimization.
"""

__version__ = "0.1.0"

from .burgers import SolverConfig, initial_condition, simulate, spatial_residual  # noqa: E402
from .model import GaussianBumps1D, Grid, SingularTriplet, Strips2D, Trajectory  # noqa: E402
from .objectives import ObjectiveSpec  # noqa: E402
from .pod import align_sign, center, compute_modes  # noqa: E402
from .problem import Problem, target_from_design  # noqa: E402

__all__ = [
    "Grid", "Trajectory", "SingularTriplet", "GaussianBumps1D", "Strips2D",
    "SolverConfig", "simulate", "spatial_residual", "initial_condition",
    "center", "compute_modes", "align_sign", "ObjectiveSpec", "Problem",
    "target_from_design",
]
