"""Dense two-phase simplex with Bland's pivoting rule.

Solves ``max c^T x`` subject to ``A_eq x = b_eq``, ``A_ub x <= b_ub`` and
``x >= 0``. Problems here have at most a few hundred columns, so a full
tableau is rebuilt in NumPy and pivots are plain row operations.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL, Tolerances

logger = logging.getLogger(__name__)


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class SolverError(RuntimeError):
    """Numerical breakdown; raised instead of returning a doubtful answer."""


def _block(lhs, rhs, n: int, name: str):
    if lhs is None:
        return np.zeros((0, n)), np.zeros(0)
    lhs = np.atleast_2d(np.asarray(lhs, dtype=float))
    if lhs.size == 0:
        return np.zeros((0, n)), np.zeros(0)
    rhs = np.atleast_1d(np.asarray(rhs, dtype=float)).reshape(-1)
    if lhs.shape[1] != n or lhs.shape[0] != rhs.shape[0]:
        raise ValueError(f"{name} has shape {lhs.shape} with {rhs.shape[0]} right-hand sides, n={n}")
    return lhs, rhs


@dataclass
class LinearProgram:
    """``max objective^T x`` s.t. equality rows, ``<=`` rows and ``x >= 0``."""

    objective: np.ndarray
    eq_lhs: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None
    ineq_lhs: np.ndarray | None = None
    ineq_rhs: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        n = self.objective.size
        self.eq_lhs, self.eq_rhs = _block(self.eq_lhs, self.eq_rhs, n, "eq_lhs")
        self.ineq_lhs, self.ineq_rhs = _block(self.ineq_lhs, self.ineq_rhs, n, "ineq_lhs")
        for arr in (self.objective, self.eq_lhs, self.eq_rhs, self.ineq_lhs, self.ineq_rhs):
            if not np.all(np.isfinite(arr)):
                raise ValueError("linear program has non-finite data")

    @property
    def n(self) -> int:
        return self.objective.size


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray | None
    objective_value: float
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Rows ``T[i] = B^{-1} [A | b]`` together with the basic column indices."""

    def __init__(self, T: np.ndarray, basis: list[int], tol: Tolerances, verbose: bool):
        self.T = T
        self.basis = basis
        self.tol = tol
        self.verbose = verbose
        self.iterations = 0

    @property
    def rhs(self) -> np.ndarray:
        return self.T[:, -1]

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] /= T[row, col]
        others = np.arange(T.shape[0]) != row
        T[others] -= np.outer(T[others, col], T[row])
        T[others, col] = 0.0
        # clean round-off on the right-hand side
        rhs = T[:, -1]
        rhs[(rhs < 0) & (rhs > -self.tol.lp_feas)] = 0.0
        self.basis[row] = col
        self.iterations += 1
        if self.verbose:
            logger.debug("pivot row=%d col=%d\n%s", row, col, np.array2string(T, precision=4))

    def reduced_costs(self, cost: np.ndarray, ncols: int) -> np.ndarray:
        return cost[:ncols] - cost[self.basis] @ self.T[:, :ncols]

    def run(self, cost: np.ndarray, ncols: int) -> LpStatus:
        """Maximize ``cost`` over the first ``ncols`` columns with Bland's rule."""
        tol = self.tol
        while True:
            if self.iterations >= tol.lp_max_iters:
                raise SolverError("simplex iteration limit reached")
            red = self.reduced_costs(cost, ncols)
            candidates = np.flatnonzero(red > tol.lp_opt)
            if candidates.size == 0:
                return LpStatus.OPTIMAL
            col = int(candidates[0])
            column = self.T[:, col]
            eligible = np.flatnonzero(column > tol.lp_feas)
            if eligible.size == 0:
                if np.any(column > tol.lp_pivot):
                    raise SolverError(
                        f"only tiny pivots (max {column.max():.3e}) available in column {col}"
                    )
                return LpStatus.UNBOUNDED
            ratios = self.rhs[eligible] / column[eligible]
            best = ratios.min()
            ties = eligible[ratios <= best + tol.lp_feas * max(1.0, abs(best))]
            row = int(min(ties, key=lambda i: self.basis[i]))
            self.pivot(row, col)


def solve(lp: LinearProgram, tol: Tolerances = DEFAULT_TOL, verbose: bool = False) -> LpSolution:
    """Solve a linear program with the two-phase simplex method.

    Phase one minimizes the sum of artificial variables; artificials left in
    the basis at level zero are pivoted out or their rows dropped as
    redundant. Phase two maximizes the objective. Entering and leaving
    variables follow Bland's lowest-index rule, so degenerate problems
    terminate and ties between optimal vertices resolve deterministically.

    Raises:
        SolverError: on numerical breakdown or iteration overflow.
    """
    n = lp.n
    p, q = lp.eq_lhs.shape[0], lp.ineq_lhs.shape[0]
    rows = p + q
    A = np.zeros((rows, n + q))
    A[:p, :n] = lp.eq_lhs
    A[p:, :n] = lp.ineq_lhs
    A[p:, n:] = np.eye(q)
    b = np.concatenate([lp.eq_rhs, lp.ineq_rhs])

    needs_art = np.ones(rows, dtype=bool)
    needs_art[p:] = lp.ineq_rhs < 0
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1

    art_rows = np.flatnonzero(needs_art)
    n_art = art_rows.size
    ncols = n + q + n_art
    T = np.zeros((rows, ncols + 1))
    T[:, : n + q] = A
    T[:, -1] = b
    basis = [0] * rows
    for i in range(p, rows):
        basis[i] = n + (i - p)
    for k, i in enumerate(art_rows):
        T[i, n + q + k] = 1.0
        basis[i] = n + q + k

    tab = _Tableau(T, basis, tol, verbose)
    scale = max(1.0, float(np.abs(b).max()) if b.size else 1.0)

    if n_art:
        phase1 = np.zeros(ncols)
        phase1[n + q :] = -1.0
        tab.run(phase1, ncols)
        infeas = -float(phase1[tab.basis] @ tab.rhs)
        if infeas > tol.lp_feas * scale:
            return LpSolution(LpStatus.INFEASIBLE, None, float("nan"), tab.iterations)
        _drive_out_artificials(tab, n + q)

    cost = np.zeros(n + q)
    cost[:n] = lp.objective
    tab.T = np.hstack([tab.T[:, : n + q], tab.T[:, -1:]])
    status = tab.run(cost, n + q)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(status, None, float("inf"), tab.iterations)

    full = np.zeros(n + q)
    full[tab.basis] = tab.rhs
    x = np.clip(full[:n], 0.0, None)
    return LpSolution(LpStatus.OPTIMAL, x, float(lp.objective @ x), tab.iterations)


def _drive_out_artificials(tab: _Tableau, n_real: int) -> None:
    tol = tab.tol
    keep = []
    for i in range(len(tab.basis)):
        if tab.basis[i] < n_real:
            keep.append(i)
            continue
        row = tab.T[i, :n_real]
        j = int(np.argmax(np.abs(row))) if n_real else 0
        size = abs(row[j]) if n_real else 0.0
        if size > tol.lp_feas:
            tab.pivot(i, j)
            keep.append(i)
        elif size > tol.lp_pivot:
            raise SolverError(f"cannot remove artificial variable from row {i}: pivot {size:.3e}")
        # else: redundant equality row, dropped below
    tab.T = tab.T[keep]
    tab.basis = [tab.basis[i] for i in keep]
