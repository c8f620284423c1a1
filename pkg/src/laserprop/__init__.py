"""Magnus-based split-step propagators for i eps u_t = (-eps^2 d_xx + V0(x) + e(t) x) u.

Typical use::

    from laserprop import Grid1D, Problem, Propagator, SchemeSpec, double_well_1, e1
    grid = Grid1D(-10, 10, 150)
    problem = Problem.laser(grid, double_well_1(), e1())
    u = Propagator(problem, SchemeSpec("MaCC", epsilon=1.0)).run(u0, 0.0, 1.0, 1e-3)
"""

from .grid import Grid1D, Symbol, TransformCounter, WaveFunction, l2_distance, l2_norm, make_symbol
from .harness import (
    ConfigError,
    CrossValidationError,
    ExperimentConfig,
    RunRecord,
    build_initial_state,
    load_config,
    make_reference,
    observables,
    propagate,
    sweep,
)
from .lanczos import KrylovConfig, KrylovError, expm_krylov
from .moments import gauss_legendre, grid_moments, scalar_moments
from .operators import SymOpSum, SymTerm, apply
from .potentials import (
    LaserPulse,
    StaticPotential,
    TimeDependentPotential,
    double_well_1,
    double_well_2,
    e1,
    e2,
    get_potential,
    get_pulse,
    harmonic,
    laser_potential,
)
from .schemes import SCHEME_IDS, Problem, Propagator, SchemeSpec, step_times, transform_budget

__all__ = [
    "Grid1D", "Symbol", "TransformCounter", "WaveFunction", "l2_distance", "l2_norm",
    "make_symbol", "ConfigError", "CrossValidationError", "ExperimentConfig", "RunRecord",
    "build_initial_state", "load_config", "make_reference", "observables", "propagate", "sweep",
    "KrylovConfig", "KrylovError", "expm_krylov", "gauss_legendre", "grid_moments",
    "scalar_moments", "SymOpSum", "SymTerm", "apply", "LaserPulse", "StaticPotential",
    "TimeDependentPotential", "double_well_1", "double_well_2", "e1", "e2", "get_potential",
    "get_pulse", "harmonic", "laser_potential", "SCHEME_IDS", "Problem", "Propagator",
    "SchemeSpec", "step_times", "transform_budget",
]
