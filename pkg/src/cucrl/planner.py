"""Occupation-measure linear programs for CMDP planning.

Both the exact planner (true means) and the robust planner used by the
learners maximize a reward vector over the stationary-flow polytope

    { y >= 0 : sum_a y(s', a) = sum_{s,a} P(s'|s,a) y(s,a),  1^T y = 1 }

intersected with linear cost constraints ``c_i^T y <= d_i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .cmdp import Cmdp, OccupationMeasure, Policy
from .config import DEFAULT_TOL, Tolerances


@dataclass(frozen=True, eq=False)
class PlanResult:
    """Solution of a planning LP.

    ``y``, ``policy`` and ``value`` are ``None`` unless ``feasible``.
    """

    status: lp.LpStatus
    y: OccupationMeasure | None
    policy: Policy | None
    value: float | None

    @property
    def feasible(self) -> bool:
        return self.status is lp.LpStatus.OPTIMAL


def flow_constraints(P: np.ndarray, n_actions: int) -> tuple[np.ndarray, np.ndarray]:
    """Equality block ``[I_o - P^T; 1^T] y = [0; 1]`` for an ``(S*A, S)`` kernel."""
    P = np.asarray(P, dtype=float)
    n_pairs, S = P.shape
    I_o = np.kron(np.eye(S), np.ones((1, n_actions)))
    lhs = np.vstack([I_o - P.T, np.ones((1, n_pairs))])
    rhs = np.zeros(S + 1)
    rhs[-1] = 1.0
    return lhs, rhs


def _plan(P, n_actions, reward, costs, budgets, tol: Tolerances) -> PlanResult:
    eq_lhs, eq_rhs = flow_constraints(P, n_actions)
    costs = np.asarray(costs, dtype=float)
    budgets = np.atleast_1d(np.asarray(budgets, dtype=float))
    has_costs = costs.size > 0
    problem = lp.LinearProgram(
        objective=reward,
        eq_lhs=eq_lhs,
        eq_rhs=eq_rhs,
        ineq_lhs=np.atleast_2d(costs) if has_costs else None,
        ineq_rhs=budgets if has_costs else None,
    )
    sol = lp.solve(problem, tol)
    if not sol.optimal:
        return PlanResult(sol.status, None, None, None)
    y = sol.x.copy()
    y[y < tol.occupation_snap] = 0.0
    y /= y.sum()
    occ = OccupationMeasure(y, n_actions)
    value = float(np.asarray(reward, dtype=float) @ y)
    return PlanResult(sol.status, occ, recover_policy(occ, tol), value)


def solve_cmdp(cmdp: Cmdp, tol: Tolerances = DEFAULT_TOL) -> PlanResult:
    """Optimal occupation measure and stationary policy for known means.

    Infeasibility is reported through ``PlanResult.status``; solver breakdown
    propagates as :class:`cucrl.lp.SolverError`.
    """
    return _plan(cmdp.P, cmdp.A, cmdp.mean_reward, cmdp.mean_costs, cmdp.budgets, tol)


def solve_robust(P, n_actions: int, tilde_r, tilde_c, d, tol: Tolerances = DEFAULT_TOL) -> PlanResult:
    """Planning LP with confidence-widened rewards and costs.

    Callers pass optimistic rewards and pessimistic (upward-widened) costs;
    any feasible solution is then safe whenever the true costs lie below
    ``tilde_c``. Pass an empty ``tilde_c`` for a cost-free problem.
    """
    return _plan(P, n_actions, tilde_r, tilde_c, d, tol)


def recover_policy(y: OccupationMeasure, tol: Tolerances = DEFAULT_TOL) -> Policy:
    """``pi(a|s) = y(s,a) / sum_a y(s,a)``; states without mass get the uniform policy."""
    Y = y.matrix().copy()
    Y[Y < tol.occupation_snap] = 0.0
    mass = Y.sum(axis=1, keepdims=True)
    empty = mass[:, 0] < tol.occupation_snap
    probs = np.where(empty[:, None], 1.0 / y.A, Y / np.where(empty[:, None], 1.0, mass))
    probs /= probs.sum(axis=1, keepdims=True)
    return Policy(probs)
