"""Central configurations of the n-body problem computed on mutual differences."""

__version__ = "0.1.0"

from .cochain import (  # noqa: E402
    Masses,
    OneCochain,
    TwoCochain,
    center_of_mass,
    coboundary0,
    coboundary1,
    mass_inner_c0,
    mass_inner_c1,
    pair_index,
    pm_matrix,
    project_pm,
    project_to_x,
)
from .errors import CollisionError, ConvergenceError, DegenerateConfigurationError, NotACocycleError  # noqa: E402
from .potential import PotentialParams, cc_residual, f_tilde, grad_u, lambda_of, potential_u, psi_gamma  # noqa: E402
from .solvers import (  # noqa: E402
    CCSolution,
    Method,
    SolveSettings,
    multistart_solve,
    rescale_to_lambda,
    solve,
    solve_fixed_point,
    solve_moulton,
    solve_newton,
    solve_variational,
)
