"""Metrics, file outputs and experiment orchestration."""

from .metrics import (
    DiagnosticWarning,
    EpisodeMetrics,
    Metrics,
    OracleError,
    RegretDiagnostics,
    SlopeFit,
    compute_metrics,
    pseudo_regret_episode,
    regret_diagnostics,
    regret_slope,
    violation_probability,
    widening_check,
)

__all__ = [
    "DiagnosticWarning",
    "EpisodeMetrics",
    "Metrics",
    "OracleError",
    "RegretDiagnostics",
    "SlopeFit",
    "compute_metrics",
    "pseudo_regret_episode",
    "regret_diagnostics",
    "regret_slope",
    "violation_probability",
    "widening_check",
]
