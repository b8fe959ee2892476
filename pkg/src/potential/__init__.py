"""
Potential theory of the catalog processes: subordinator potentials, kernels,
ball potentials, capacities, Green functions and exit distributions, each
placed in its proven two-sided bracket.
"""

from src.potential.balls import ball_estimate, ball_potential, capacity_estimate, laplace_cross_check, laplace_rhs
from src.potential.bracket import PotentialBracket
from src.potential.constants import (
    BALL_UPPER,
    SUBORDINATOR_LOWER,
    SUBORDINATOR_UPPER,
    GreenLowerFactor,
    KernelLowerConstants,
    PotentialConstants,
    green_lower_radius_factor,
    kernel_lower_lp,
    kernel_lower_sbm,
    potential_constants,
    select_green_lower_factor,
)
from src.potential.green_function import (
    GreenEstimate,
    exterior_ball_mass,
    hunt_green,
    poisson_kernel,
)
from src.potential.kernels import (
    GreenKernelTable,
    green_kernel,
    green_kernel_table,
    green_lower_factor,
    kernel_bracket,
    riesz_kernel,
    stieltjes_integral,
)
from src.potential.subordinator import (
    SubordinatorPotential,
    stehfest_coefficients,
    stehfest_invert,
    subordinator_potential,
)

__all__ = [
    'BALL_UPPER', 'SUBORDINATOR_LOWER', 'SUBORDINATOR_UPPER',
    'GreenEstimate', 'GreenKernelTable', 'GreenLowerFactor', 'KernelLowerConstants', 'PotentialBracket',
    'PotentialConstants', 'SubordinatorPotential',
    'ball_estimate', 'ball_potential', 'capacity_estimate', 'exterior_ball_mass',
    'green_kernel', 'green_kernel_table', 'green_lower_factor', 'green_lower_radius_factor', 'hunt_green',
    'kernel_bracket', 'kernel_lower_lp', 'kernel_lower_sbm', 'laplace_cross_check', 'laplace_rhs',
    'poisson_kernel', 'potential_constants', 'riesz_kernel', 'select_green_lower_factor', 'stehfest_coefficients',
    'stehfest_invert', 'stieltjes_integral', 'subordinator_potential',
]
