"""Spectral solvers for the three-wave interaction Schrodinger system."""

from .evolution import (
    EvolveConfig,
    Region,
    Trajectory,
    classify_region,
    evolve,
    h1_bound,
    oscillation_scan,
    strang_step,
    threshold_constants,
)
from .functionals import (
    Case,
    FunctionalReport,
    action_gradient,
    classify_case,
    nehari_project,
    phase_map,
    report,
    tilde_report,
    twisted_translate,
)
from .grid import Grid, make_grid
from .solvers import (
    ConvergenceError,
    SolveOptions,
    WaveResult,
    gn_constant,
    ground_state,
    mu_estimate,
    nonexistence_probe,
    pohozaev_check,
    scaling_consistency,
    traveling_wave,
)
from .state import InvariantSet, Params, TriField, galilean_boost, gauge_transform, invariants

__all__ = [
    "Case",
    "ConvergenceError",
    "EvolveConfig",
    "FunctionalReport",
    "Grid",
    "InvariantSet",
    "Params",
    "Region",
    "SolveOptions",
    "Trajectory",
    "TriField",
    "WaveResult",
    "action_gradient",
    "classify_case",
    "classify_region",
    "evolve",
    "galilean_boost",
    "gauge_transform",
    "gn_constant",
    "ground_state",
    "h1_bound",
    "invariants",
    "make_grid",
    "mu_estimate",
    "nehari_project",
    "nonexistence_probe",
    "oscillation_scan",
    "phase_map",
    "pohozaev_check",
    "report",
    "scaling_consistency",
    "strang_step",
    "threshold_constants",
    "tilde_report",
    "traveling_wave",
    "twisted_translate",
]
