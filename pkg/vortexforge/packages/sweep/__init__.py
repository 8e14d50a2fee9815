"""Critical-coupling bracketing and λ-sweeps."""
from .critical import CriticalEstimate, Probe, find_critical_lambda, interval_consistent
from .sweep import (
    SWEEP_COLUMNS,
    SweepOptions,
    SweepRow,
    converged_upward_closed,
    format_value,
    max_v_monotone,
    run_sweep_row,
    sweep_csv,
    sweep_lambda,
    write_sweep_csv,
)

__all__ = [
    "CriticalEstimate", "Probe", "find_critical_lambda", "interval_consistent",
    "SWEEP_COLUMNS", "SweepOptions", "SweepRow", "converged_upward_closed", "format_value",
    "max_v_monotone", "run_sweep_row", "sweep_csv", "sweep_lambda", "write_sweep_csv",
]
