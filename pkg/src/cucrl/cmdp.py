"""Finite constrained MDPs, stationary policies and occupation measures.

State-action pairs are flattened in row-major order, ``(s, a) -> s * A + a``,
everywhere in the package. The transition kernel is stored as an
``(S * A, S)`` matrix whose row ``s * A + a`` is ``P(. | s, a)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import DEFAULT_TOL, Tolerances


class CmdpError(ValueError):
    """Malformed CMDP, policy or occupation measure."""


class ChainError(RuntimeError):
    """The Markov chain induced by a policy has no unique stationary law."""


def pair_index(s: int, a: int, n_actions: int) -> int:
    return s * n_actions + a


def _as_prob_rows(x, name: str, atol: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise CmdpError(f"{name} has non-finite entries")
    if np.any(x < 0):
        raise CmdpError(f"{name} has negative entries")
    bad = np.abs(x.sum(axis=-1) - 1.0) > atol
    if np.any(bad):
        raise CmdpError(f"{name}: rows {np.flatnonzero(bad).tolist()} do not sum to 1")
    return x


@dataclass(frozen=True, eq=False)
class Cmdp:
    """A tabular CMDP with known kernel and mean reward/cost tables.

    Attributes:
        S: number of states.
        A: number of actions (same action set in every state).
        P: ``(S*A, S)`` transition matrix.
        mean_reward: ``(S*A,)`` mean rewards in [0, 1].
        mean_costs: ``(m, S*A)`` mean costs in [0, 1].
        budgets: ``(m,)`` nonnegative bounds on the average costs.
    """

    S: int
    A: int
    P: np.ndarray
    mean_reward: np.ndarray
    mean_costs: np.ndarray
    budgets: np.ndarray

    def __post_init__(self):
        S, A = int(self.S), int(self.A)
        if S < 1 or A < 1:
            raise CmdpError("S and A must be positive")
        P = _as_prob_rows(self.P, "P", DEFAULT_TOL.prob_atol)
        if P.shape != (S * A, S):
            raise CmdpError(f"P must have shape {(S * A, S)}, got {P.shape}")
        r = np.asarray(self.mean_reward, dtype=float).reshape(-1)
        if r.shape != (S * A,):
            raise CmdpError(f"mean_reward must have length {S * A}")
        c = np.asarray(self.mean_costs, dtype=float)
        if c.size == 0:
            c = np.zeros((0, S * A))
        c = np.atleast_2d(c)
        if c.shape[1] != S * A:
            raise CmdpError(f"mean_costs rows must have length {S * A}")
        d = np.atleast_1d(np.asarray(self.budgets, dtype=float)).reshape(-1)
        if d.shape != (c.shape[0],):
            raise CmdpError("one budget per cost function is required")
        for name, v in (("mean_reward", r), ("mean_costs", c)):
            if not np.all(np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
                raise CmdpError(f"{name} must lie in [0, 1]")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise CmdpError("budgets must be finite and nonnegative")
        for arr in (P, r, c, d):
            arr.setflags(write=False)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "mean_reward", r)
        object.__setattr__(self, "mean_costs", c)
        object.__setattr__(self, "budgets", d)

    @property
    def m(self) -> int:
        return self.mean_costs.shape[0]

    @property
    def n_pairs(self) -> int:
        return self.S * self.A

    def kernel(self) -> np.ndarray:
        """``P`` reshaped to ``(S, A, S)``."""
        return self.P.reshape(self.S, self.A, self.S)

    def with_means(self, mean_reward=None, mean_costs=None, budgets=None) -> Cmdp:
        return Cmdp(
            self.S,
            self.A,
            self.P,
            self.mean_reward if mean_reward is None else mean_reward,
            self.mean_costs if mean_costs is None else mean_costs,
            self.budgets if budgets is None else budgets,
        )

    def to_dict(self) -> dict:
        return {
            "S": self.S,
            "A": self.A,
            "P": self.P.tolist(),
            "mean_reward": self.mean_reward.tolist(),
            "mean_costs": self.mean_costs.tolist(),
            "budgets": self.budgets.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> Cmdp:
        missing = {"S", "A", "P", "mean_reward", "mean_costs", "budgets"} - set(doc)
        if missing:
            raise CmdpError(f"CMDP document is missing {sorted(missing)}")
        return cls(
            doc["S"], doc["A"], doc["P"], doc["mean_reward"], doc["mean_costs"], doc["budgets"]
        )

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict())
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source) -> Cmdp:
        """Load from a JSON string or a path to a JSON file."""
        if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
            source = Path(source).read_text()
        return cls.from_dict(json.loads(source))


@dataclass(frozen=True, eq=False)
class Policy:
    """Stationary randomized policy, ``probs[s, a] = pi(a | s)``."""

    probs: np.ndarray

    def __post_init__(self):
        p = _as_prob_rows(np.atleast_2d(np.asarray(self.probs, dtype=float)), "policy", 1e-9)
        p = p / p.sum(axis=1, keepdims=True)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def S(self) -> int:
        return self.probs.shape[0]

    @property
    def A(self) -> int:
        return self.probs.shape[1]

    @classmethod
    def uniform(cls, S: int, A: int) -> Policy:
        return cls(np.full((S, A), 1.0 / A))

    def is_deterministic(self, states=None, atol: float = 1e-9) -> bool:
        rows = self.probs if states is None else self.probs[np.asarray(states, dtype=int)]
        return bool(np.all(np.abs(rows.max(axis=1) - 1.0) <= atol))

    def __eq__(self, other):
        return isinstance(other, Policy) and np.array_equal(self.probs, other.probs)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class OccupationMeasure:
    """Long-run state-action frequencies ``y`` flattened as ``s * A + a``."""

    y: np.ndarray
    n_actions: int

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if y.size % self.n_actions:
            raise CmdpError("length of y is not a multiple of n_actions")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def S(self) -> int:
        return self.y.size // self.n_actions

    @property
    def A(self) -> int:
        return self.n_actions

    def matrix(self) -> np.ndarray:
        return self.y.reshape(self.S, self.A)

    def state_marginal(self) -> np.ndarray:
        return self.matrix().sum(axis=1)

    def flow_residual(self, cmdp: Cmdp) -> float:
        """``max |I_o y - P^T y|`` over states."""
        return float(np.max(np.abs(self.state_marginal() - cmdp.P.T @ self.y)))

    def check(self, cmdp: Cmdp, atol: float = DEFAULT_TOL.flow_atol) -> None:
        if self.y.size != cmdp.n_pairs:
            raise CmdpError("occupation measure does not match the CMDP dimensions")
        if np.any(self.y < -atol):
            raise CmdpError("occupation measure has negative entries")
        if abs(self.y.sum() - 1.0) > atol:
            raise CmdpError("occupation measure does not sum to 1")
        if self.flow_residual(cmdp) > atol:
            raise CmdpError("occupation measure violates flow conservation")


@dataclass(frozen=True)
class ChainDiagnostics:
    """Mixing and coverage constants of the chain induced by a baseline policy.

    ``min_occupation`` is the smallest baseline state-action frequency and
    ``phi`` is the chi-square-like distance ``sum y'(s,a)^2 / y0(s,a)`` of an
    initial distribution ``y'`` from the baseline occupation ``y0``.
    """

    stationary: np.ndarray
    mixing_time: int
    min_occupation: float
    phi: float


def _check_dims(cmdp: Cmdp, policy: Policy) -> None:
    if policy.probs.shape != (cmdp.S, cmdp.A):
        raise CmdpError(
            f"policy shape {policy.probs.shape} does not match CMDP ({cmdp.S}, {cmdp.A})"
        )


def induced_chain(cmdp: Cmdp, policy: Policy) -> np.ndarray:
    """State transition matrix ``M[s, s'] = sum_a pi(a|s) P(s'|s,a)``."""
    _check_dims(cmdp, policy)
    return np.einsum("sa,sat->st", policy.probs, cmdp.kernel())


def _stationary_direct(M: np.ndarray) -> np.ndarray:
    S = M.shape[0]
    G = M.T - np.eye(S)
    sv = np.linalg.svd(G, compute_uv=False)
    if S > 1 and sv[-2] < 1e-10 * max(1.0, sv[0]):
        raise ChainError("chain may be periodic/reducible: stationary law is not unique")
    lhs = np.vstack([G, np.ones((1, S))])
    rhs = np.zeros(S + 1)
    rhs[-1] = 1.0
    mu = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
    mu = np.clip(mu, 0.0, None)
    return mu / mu.sum()


def stationary_distribution(M: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Unique stationary distribution of a row-stochastic matrix.

    Power iteration runs on the lazy chain ``(M + I) / 2`` (same stationary law,
    always aperiodic). If it has not converged after ``tol.stationary_max_iters``
    sweeps, a direct null-space solve takes over; a null space of dimension
    above one raises :class:`ChainError`.
    """
    M = np.asarray(M, dtype=float)
    S = M.shape[0]
    if S == 1:
        return np.ones(1)
    lazy = 0.5 * (M + np.eye(S))
    mu = np.full(S, 1.0 / S)
    converged = False
    for _ in range(tol.stationary_max_iters):
        nxt = mu @ lazy
        if np.max(np.abs(nxt - mu)) < tol.stationary_tol:
            mu = nxt
            converged = True
            break
        mu = nxt
    # power iteration can settle on a non-unique fixed point; the direct
    # solve also certifies uniqueness
    direct = _stationary_direct(M)
    if converged and np.max(np.abs(direct - mu)) < 1e-8:
        return mu / mu.sum()
    return direct


def stationary_occupation(
    cmdp: Cmdp, policy: Policy, tol: Tolerances = DEFAULT_TOL
) -> OccupationMeasure:
    """Steady-state occupation measure ``y(s, a) = mu(s) pi(a | s)``."""
    mu = stationary_distribution(induced_chain(cmdp, policy), tol)
    return OccupationMeasure((mu[:, None] * policy.probs).reshape(-1), cmdp.A)


def average_value(y, values) -> float:
    """Long-run average of a per-pair quantity, ``y^T values``."""
    yv = y.y if isinstance(y, OccupationMeasure) else np.asarray(y, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != yv.shape[0]:
        raise CmdpError(f"length mismatch: {yv.shape[0]} vs {values.shape[-1]}")
    return float(values @ yv) if values.ndim == 1 else values @ yv


def mixing_time(M: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> int:
    """Smallest ``t >= 1`` with ``max_s TV(M^t[s], mu) <= tol.mixing_tv``."""
    M = np.asarray(M, dtype=float)
    mu = stationary_distribution(M, tol)
    Mt = M.copy()
    for t in range(1, tol.stationary_max_iters + 1):
        tv = 0.5 * np.abs(Mt - mu).sum(axis=1).max()
        if tv <= tol.mixing_tv:
            return t
        Mt = Mt @ M
    raise ChainError("chain may be periodic/reducible: it does not mix")


def chain_diagnostics(
    cmdp: Cmdp, baseline: Policy, initial=None, tol: Tolerances = DEFAULT_TOL
) -> ChainDiagnostics:
    """Mixing time, minimum occupation and ``phi`` for a baseline policy.

    Args:
        cmdp: the CMDP (only the kernel is used).
        baseline: exploration policy.
        initial: initial state-action distribution of length ``S*A``. Defaults
            to starting in state 0 and drawing the first action from ``baseline``.
    """
    M = induced_chain(cmdp, baseline)
    y0 = stationary_occupation(cmdp, baseline, tol)
    if initial is None:
        initial = np.zeros(cmdp.n_pairs)
        initial[: cmdp.A] = baseline.probs[0]
    initial = np.asarray(initial, dtype=float)
    if initial.shape != (cmdp.n_pairs,):
        raise CmdpError("initial distribution must have length S*A")
    rho = float(y0.y.min())
    support = initial > 0
    if np.any(y0.y[support] <= 0):
        phi = float("inf")
    else:
        phi = float(np.sum(initial[support] ** 2 / y0.y[support]))
    return ChainDiagnostics(
        stationary=y0.state_marginal(),
        mixing_time=mixing_time(M, tol),
        min_occupation=rho,
        phi=phi,
    )
