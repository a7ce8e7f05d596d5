"""State-vector benchmark of multi-stage quantum walks, QAOA, and a stepped
annealing reference on Sherrington-Kirkpatrick spin-glass ground-state
problems.
"""

from .errors import ConfigurationError, ConvergenceError, UsageError
from .experiment import (
    GridScanResult,
    ScalingReport,
    dominance_study,
    emit_schedule_profile,
    scaling_study,
    scan_multistage,
    scan_single_stage,
)
from .model import (
    DiagonalEnergies,
    GroundStateRecord,
    SpinGlassInstance,
    apply_driver,
    build_diagonal,
    generate_instance,
    solve_ground_state,
)
from .propagate import (
    AnnealSchedule,
    anneal_propagate,
    build_dense_unitary,
    driver_propagate,
    mix_propagate,
    phase_propagate,
    qw_propagate,
)
from .protocol import (
    HeuristicScheduleParams,
    MetricSample,
    MsqwSchedule,
    QaoaSchedule,
    build_heuristic_schedule,
    map_gamma_to_qaoa,
    measure_metrics,
    run_msqw,
    run_qaoa,
    time_averaged_metrics,
)
from .states import DenseUnitary, StateVector, inner_product, make_plus_state, spectral_norm

__version__ = "0.1.0"

__all__ = [
    "AnnealSchedule",
    "ConfigurationError",
    "ConvergenceError",
    "DenseUnitary",
    "DiagonalEnergies",
    "GridScanResult",
    "GroundStateRecord",
    "HeuristicScheduleParams",
    "MetricSample",
    "MsqwSchedule",
    "QaoaSchedule",
    "ScalingReport",
    "SpinGlassInstance",
    "StateVector",
    "UsageError",
    "anneal_propagate",
    "apply_driver",
    "build_dense_unitary",
    "build_diagonal",
    "build_heuristic_schedule",
    "dominance_study",
    "driver_propagate",
    "emit_schedule_profile",
    "generate_instance",
    "inner_product",
    "make_plus_state",
    "map_gamma_to_qaoa",
    "measure_metrics",
    "mix_propagate",
    "phase_propagate",
    "qw_propagate",
    "run_msqw",
    "run_qaoa",
    "scaling_study",
    "scan_multistage",
    "scan_single_stage",
    "solve_ground_state",
    "spectral_norm",
    "time_averaged_metrics",
]
