"""Aggregation-fragmentation kinetics with adaptive Runge-Kutta time stepping."""

from ._core import (
    __version__,
    detect_oscillations,
    euler_stability_bound,
    eval_rhs,
    fit_cutoff,
    fit_power_law,
    kernel_entry,
    moments,
    run_file,
    run_text,
)

__all__ = [
    "__version__",
    "detect_oscillations",
    "euler_stability_bound",
    "eval_rhs",
    "fit_cutoff",
    "fit_power_law",
    "kernel_entry",
    "moments",
    "run_file",
    "run_text",
]
