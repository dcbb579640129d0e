"""Safe exploration in tabular constrained MDPs.

Exact planning through occupation-measure linear programs, the
constrained UCRL learner with a safe baseline, and the scalarized UCRL2
comparison agent.
"""

from .agents import CucrlConfig, FeasibilityError, RunLog, run_cucrl, run_rs_ucrl2
from .cmdp import (
    ChainError,
    Cmdp,
    CmdpError,
    OccupationMeasure,
    Policy,
    average_value,
    chain_diagnostics,
    induced_chain,
    mixing_time,
    stationary_distribution,
    stationary_occupation,
)
from .config import DEFAULT_TOL, Tolerances
from .environments import Environment, gridworld_from_ascii, make_bandit, make_gridworld, make_three_state
from .estimation import Estimator, radius, rs_radius
from .lp import LinearProgram, LpSolution, LpStatus, SolverError, solve
from .planner import PlanResult, recover_policy, solve_cmdp, solve_robust

__version__ = "0.1.0"

__all__ = [
    "ChainError",
    "Cmdp",
    "CmdpError",
    "CucrlConfig",
    "DEFAULT_TOL",
    "Environment",
    "Estimator",
    "FeasibilityError",
    "LinearProgram",
    "LpSolution",
    "LpStatus",
    "OccupationMeasure",
    "PlanResult",
    "Policy",
    "RunLog",
    "SolverError",
    "Tolerances",
    "average_value",
    "chain_diagnostics",
    "gridworld_from_ascii",
    "induced_chain",
    "make_bandit",
    "make_gridworld",
    "make_three_state",
    "mixing_time",
    "radius",
    "recover_policy",
    "rs_radius",
    "run_cucrl",
    "run_rs_ucrl2",
    "solve",
    "solve_cmdp",
    "solve_robust",
    "stationary_distribution",
    "stationary_occupation",
]
