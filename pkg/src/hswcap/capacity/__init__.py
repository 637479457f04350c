from .closed_form import (
    DegenerateSegment,
    EndpointPure,
    LinearSolveState,
    NoBracket,
    NotUnital,
    linear_capacity_axis_aligned,
    linear_capacity_general,
    unital_capacity,
)
from .dispatch import METHODS, capacity_sweep, point_capacity, solve_capacity
from .ensemble import NotInHull, recover_ensemble
from .iterative import IterConfig, MaxItersExceeded, iterative_capacity
from .result import CapacityResult, Method, SignalEnsemble, SignalMember, SolverError, holevo_chi, holevo_chi_divergence
from .surface import max_relative_entropy_on_surface, surface_search
