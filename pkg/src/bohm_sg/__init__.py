"""Bohmian trajectories of an optical Stern-Gerlach measurement with two pointers."""

from .config import RunConfig, figure_preset, parse_config, serialize_config
from .ensemble import EnsembleSummary, Outcome, classify_outcome, run_ensemble, run_trajectories
from .full import full_field, full_log_weights, full_velocity, reduce_full_state
from .integrator import IntegrationConfig, StepFailure, integrate, integrate_batch
from .params import (
    FullState,
    ModelParams,
    ReducedState,
    SpinWeights,
    Trajectory,
    effective_rapidity,
    polarization,
    rapidity,
    validate_params,
)
from .reduced import branch_exponents, branch_weight, reduced_field, reduced_velocity
from .sampling import InitialConditionSpec, grid_initial_positions, sample_equilibrium

__all__ = [
    "EnsembleSummary", "FullState", "InitialConditionSpec", "IntegrationConfig", "ModelParams",
    "Outcome", "ReducedState", "RunConfig", "SpinWeights", "StepFailure", "Trajectory",
    "branch_exponents", "branch_weight", "classify_outcome", "effective_rapidity",
    "figure_preset", "full_field", "full_log_weights", "full_velocity", "grid_initial_positions",
    "integrate", "integrate_batch", "parse_config", "polarization", "rapidity",
    "reduce_full_state", "reduced_field", "reduced_velocity", "run_ensemble",
    "run_trajectories", "sample_equilibrium", "serialize_config", "validate_params",
]
