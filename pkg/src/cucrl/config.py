"""Numerical tolerances shared across the package."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Central tolerance table.

    Every module reads its thresholds from an instance of this class so a
    single override (``Tolerances(lp_feas=1e-10)``) propagates everywhere.
    """

    # row sums of P and of policies
    prob_atol: float = 1e-12
    # flow conservation / normalization of occupation measures
    flow_atol: float = 1e-8
    # stationary distribution by power iteration
    stationary_tol: float = 1e-12
    stationary_max_iters: int = 100_000
    # simplex
    lp_feas: float = 1e-9
    lp_opt: float = 1e-9
    lp_pivot: float = 1e-11
    lp_max_iters: int = 50_000
    # occupation entries below this are treated as exactly zero
    occupation_snap: float = 1e-12
    # slack allowed when judging a true-cost violation
    violation_atol: float = 1e-8
    # total-variation threshold defining the mixing time
    mixing_tv: float = 0.25


DEFAULT_TOL = Tolerances()
