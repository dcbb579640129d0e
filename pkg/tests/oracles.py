"""Reference computations that share no code with the package.

Each oracle takes the slow, obviously-correct route: enumerate every basic
point of an LP, solve a Markov chain's balance equations directly, or
evaluate a closed form.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def _basic_points(G, g, n_eq, n):
    """All points where ``n`` linearly independent rows of ``G x (=|<=) g`` are tight
    (the first ``n_eq`` rows always tight) and every row is satisfied."""
    rows = G.shape[0]
    if n_eq >= n:
        # the equalities alone pin down at most one point
        x, *_ = np.linalg.lstsq(G[:n_eq], g[:n_eq], rcond=None)
        if np.linalg.matrix_rank(G[:n_eq]) < n or np.abs(G[:n_eq] @ x - g[:n_eq]).max() > 1e-9:
            return []
        cand = x[None, :]
    else:
        combos = np.array(list(itertools.combinations(range(n_eq, rows), n - n_eq)), dtype=int)
        if combos.size == 0:
            return []
        idx = np.hstack([np.tile(np.arange(n_eq), (combos.shape[0], 1)), combos])
        Ms, bs = G[idx], g[idx]
        keep = np.abs(np.linalg.det(Ms)) > 1e-10
        if not keep.any():
            return []
        cand = np.linalg.solve(Ms[keep], bs[keep][..., None])[..., 0]
    resid = cand @ G.T - g
    ok = np.all(np.abs(resid[:, :n_eq]) <= 1e-9, axis=1) & np.all(resid[:, n_eq:] <= 1e-9, axis=1)
    return list(cand[ok])


def lp_vertex_oracle(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None):
    """Brute-force ``max c^T x`` over ``A_eq x = b_eq, A_ub x <= b_ub, x >= 0``.

    Returns ``("infeasible" | "unbounded" | "optimal", value)``. Feasibility
    is decided by vertex enumeration (the region lies in the nonnegative
    orthant, so it has a vertex whenever it is nonempty). Unboundedness is
    decided by enumerating the vertices of the normalized recession cone
    ``{d >= 0, A_eq d = 0, A_ub d <= 0, 1^T d = 1}``.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)

    # keep a linearly independent subset of the equalities; the dropped rows
    # are still checked through the residual test
    keep = []
    for i in range(A_eq.shape[0]):
        if np.linalg.matrix_rank(A_eq[keep + [i]], tol=1e-9) > len(keep):
            keep.append(i)
    A_ind, b_ind = A_eq[keep], b_eq[keep]

    G = np.vstack([A_ind, A_eq, A_ub, -np.eye(n)])
    g = np.concatenate([b_ind, b_eq, b_ub, np.zeros(n)])
    pts = [x for x in _basic_points(G, g, len(keep), n) if np.all(np.abs(A_eq @ x - b_eq) <= 1e-9)]
    if not pts:
        return "infeasible", None

    Gc = np.vstack([A_ind, np.ones((1, n)), A_eq, A_ub, -np.eye(n)])
    gc = np.concatenate([np.zeros(len(keep)), [1.0], np.zeros(A_eq.shape[0] + A_ub.shape[0] + n)])
    rays = [d for d in _basic_points(Gc, gc, len(keep) + 1, n) if np.all(np.abs(A_eq @ d) <= 1e-9)]
    if any(c @ d > 1e-9 for d in rays):
        return "unbounded", None
    return "optimal", max(float(c @ x) for x in pts)


def stationary_oracle(M):
    """Solve ``mu (M - I) = 0, sum mu = 1`` as one square linear system.

    The last balance equation is replaced by the normalization, which is
    valid whenever the chain has a single recurrent class.
    """
    M = np.asarray(M, dtype=float)
    S = M.shape[0]
    lhs = (M.T - np.eye(S)).copy()
    lhs[-1] = 1.0
    rhs = np.zeros(S)
    rhs[-1] = 1.0
    return np.linalg.solve(lhs, rhs)


def bandit_single_constraint_optimum(r, c, d):
    """Best mix of two arms under one budget, by a fine grid over the pull
    probability of arm 0 refined with the binding-constraint closed form."""
    r0, r1 = r
    c0, c1 = c
    best_p, best_v = None, -math.inf
    cands = list(np.linspace(0.0, 1.0, 100001))
    if c0 != c1:
        cands.append((d - c1) / (c0 - c1))
    for p in cands:
        if not 0.0 <= p <= 1.0:
            continue
        if p * c0 + (1 - p) * c1 <= d + 1e-12:
            v = p * r0 + (1 - p) * r1
            if v > best_v + 1e-15:
                best_p, best_v = p, v
    return best_p, best_v


def tv(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
