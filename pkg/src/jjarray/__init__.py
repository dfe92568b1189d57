"""Static phase and critical current of point Josephson junction arrays in a microstrip cavity."""

from .model import (
    GammaCurve,
    GeometryError,
    InvalidDeviceError,
    JunctionArray,
    PhaseSolution,
    PhysicalDevice,
    junction_unit,
    normalize,
    reduce_to_unit,
    shift_unit,
)
from .piecewise import boundary_residual, build_solution, eval_phase
from .magnetic import gamma_max_magnetic, sweep_magnetic
from .newton import NewtonOptions, gamma_max_newton, solve_newton
from .implicit import GridSpec, gamma_max_implicit, sweep_implicit
from .analysis import (
    bump_count,
    estimate_squid,
    faraway_prediction,
    magnetic_shift,
    period,
    regularity_bounds,
    squid_extrema,
)
from .experiment import ExperimentData, ScaleFit, fit_scales, load_experiment

__version__ = "0.1.0"
