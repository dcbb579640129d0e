"""Regret, cost and safety metrics computed with oracle access to the true CMDP."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..agents import EpisodeRecord, Phase, RunLog
from ..cmdp import ChainError, Cmdp, OccupationMeasure, Policy, chain_diagnostics, stationary_occupation
from ..config import DEFAULT_TOL
from ..planner import PlanResult, solve_cmdp, solve_robust


class OracleError(RuntimeError):
    """The true CMDP has no feasible policy, so regret is undefined."""


class DiagnosticWarning(UserWarning):
    pass


def oracle_plan(cmdp: Cmdp) -> PlanResult:
    plan = solve_cmdp(cmdp)
    if not plan.feasible:
        raise OracleError(f"true CMDP is {plan.status.value}; check the environment configuration")
    return plan


def _y(y) -> np.ndarray:
    return y.y if isinstance(y, OccupationMeasure) else np.asarray(y, dtype=float)


def pseudo_regret_episode(cmdp: Cmdp, k: int, h: int, y0, y_tilde_k, extra_baseline_steps: int = 0, oracle: PlanResult | None = None) -> float:
    """Expected reward shortfall of episode ``k`` against the constrained optimum.

    ``(h + extra) * r^T (y_bar - y0) + (k - 1) * h * r^T (y_bar - y_k)``, where
    ``extra`` counts fallback baseline steps run in the same episode.
    """
    oracle = oracle_plan(cmdp) if oracle is None else oracle
    r = cmdp.mean_reward
    opt = oracle.value
    base_gap = opt - float(r @ _y(y0))
    learned_gap = opt - float(r @ _y(y_tilde_k))
    return (h + extra_baseline_steps) * base_gap + (k - 1) * h * learned_gap


def true_costs(cmdp: Cmdp, record: EpisodeRecord) -> np.ndarray:
    """Long-run expected costs of the episode's planned policy under the true means."""
    try:
        y = stationary_occupation(cmdp, record.policy).y
    except ChainError:
        # several recurrent classes: the planned occupation measure is the
        # one the policy was built from
        y = record.y.y
    return cmdp.mean_costs @ y


@dataclass
class EpisodeMetrics:
    k: int
    t_k: int
    rlp_status: str
    delta_k: float
    cum_regret: float
    true_costs: np.ndarray
    violation_flags: np.ndarray

    @property
    def rlp_feasible(self) -> bool:
        return self.rlp_status == "optimal"

    def __eq__(self, other):
        return (
            isinstance(other, EpisodeMetrics)
            and (self.k, self.t_k, self.rlp_status, self.delta_k, self.cum_regret)
            == (other.k, other.t_k, other.rlp_status, other.delta_k, other.cum_regret)
            and np.array_equal(self.true_costs, other.true_costs)
            and np.array_equal(self.violation_flags, other.violation_flags)
        )


@dataclass
class Metrics:
    """Per-episode and per-step summaries of one run.

    ``cumulative_regret[j]`` is the pseudo-regret accrued after step ``j + 1``;
    each episode's ``delta_k`` is spread evenly over that episode's steps, so
    the curve hits the exact prefix sums at episode boundaries.
    ``average_cost[j, i]`` is the empirical mean of cost ``i`` over the
    first ``j + 1`` steps.
    """

    per_episode: list[EpisodeMetrics]
    cumulative_regret: np.ndarray
    average_cost: np.ndarray
    diagnostics: "RegretDiagnostics | None" = None

    @property
    def total_regret(self) -> float:
        return self.per_episode[-1].cum_regret if self.per_episode else 0.0

    def __eq__(self, other):
        return (
            isinstance(other, Metrics)
            and self.per_episode == other.per_episode
            and np.array_equal(self.cumulative_regret, other.cumulative_regret)
            and np.array_equal(self.average_cost, other.average_cost)
        )


def apportion_regret(step_episodes: np.ndarray, deltas: dict[int, float]) -> np.ndarray:
    """Spread each episode's regret uniformly over its steps and accumulate."""
    step_episodes = np.asarray(step_episodes)
    per_step = np.zeros(step_episodes.size)
    for k, delta in deltas.items():
        mask = step_episodes == k
        n = int(mask.sum())
        if n:
            per_step[mask] = delta / n
    return np.cumsum(per_step)


def running_average(costs: np.ndarray) -> np.ndarray:
    costs = np.asarray(costs, dtype=float)
    if costs.shape[0] == 0:
        return costs.copy()
    return np.cumsum(costs, axis=0) / np.arange(1, costs.shape[0] + 1)[:, None]


class EpisodeScorer:
    """Turns episode records into :class:`EpisodeMetrics` one at a time."""

    def __init__(self, cmdp: Cmdp, baseline: Policy, h: int, oracle: PlanResult | None = None):
        self.cmdp = cmdp
        self.h = h
        self.oracle = oracle_plan(cmdp) if oracle is None else oracle
        self.y0 = stationary_occupation(cmdp, baseline)
        self.cum = 0.0

    def score(self, record: EpisodeRecord) -> EpisodeMetrics:
        if record.y is None:
            delta = float("nan")
            costs = np.full(self.cmdp.m, np.nan)
            flags = np.zeros(self.cmdp.m, dtype=bool)
        else:
            delta = pseudo_regret_episode(
                self.cmdp, record.k, self.h, self.y0, record.y, record.extra_baseline_steps, self.oracle
            )
            costs = true_costs(self.cmdp, record)
            flags = costs > self.cmdp.budgets + DEFAULT_TOL.violation_atol
        self.cum += delta
        return EpisodeMetrics(record.k, record.t_k, record.rlp_status, delta, self.cum, costs, flags)


def compute_metrics(log: RunLog, cmdp: Cmdp, oracle: PlanResult | None = None) -> Metrics:
    scorer = EpisodeScorer(cmdp, log.baseline, log.h, oracle)
    per_episode = [scorer.score(rec) for rec in log.episodes]
    deltas = {e.k: e.delta_k for e in per_episode}
    return Metrics(
        per_episode,
        apportion_regret(log.steps.episode, deltas),
        running_average(log.steps.costs),
    )


def violation_probability(runs, cmdp: Cmdp, d=None) -> np.ndarray:
    """Fraction of (run, episode) pairs whose planned policy breaks each budget.

    The check uses the true long-run cost of the policy, not the noisy
    realized costs.
    """
    if isinstance(runs, RunLog):
        runs = [runs]
    d = cmdp.budgets if d is None else np.atleast_1d(np.asarray(d, dtype=float))
    hits = np.zeros(cmdp.m)
    total = 0
    for log in runs:
        for rec in log.episodes:
            if rec.policy is None:
                continue
            hits += true_costs(cmdp, rec) > d + DEFAULT_TOL.violation_atol
            total += 1
    if total == 0:
        raise ValueError("no episodes with a planned policy")
    return hits / total


@dataclass
class RegretDiagnostics:
    """Constants entering the regret analysis, measured for a given baseline.

    ``alpha`` and ``beta`` compare the optimum with the baseline occupation
    measure (``beta`` holds one entry per constraint). ``bound`` evaluates the
    closed-form total-regret bound at ``T = h K'(K'+1)/2`` for ``K' = 1..K``.
    """

    alpha: float
    beta: np.ndarray
    rho: float
    xi: int
    phi: float
    zeta: float
    premises_hold: bool
    delta_condition_holds: bool
    horizons: np.ndarray
    bound: np.ndarray
    messages: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta.tolist(),
            "rho": self.rho,
            "xi": self.xi,
            "phi": self.phi,
            "zeta": self.zeta,
            "premises_hold": self.premises_hold,
            "delta_condition_holds": self.delta_condition_holds,
            "horizons": self.horizons.tolist(),
            "bound": [None if math.isnan(b) else b for b in self.bound.tolist()],
            "messages": list(self.messages),
        }


def regret_diagnostics(cmdp: Cmdp, baseline: Policy, h: int, K: int, delta: float, initial=None) -> RegretDiagnostics:
    """Measure the constants of the regret bound and warn when its premises fail."""
    oracle = oracle_plan(cmdp)
    y0 = stationary_occupation(cmdp, baseline).y
    chain = chain_diagnostics(cmdp, baseline, initial)
    S, A, m = cmdp.S, cmdp.A, cmdp.m
    alpha = float(cmdp.mean_reward @ (oracle.y.y - y0))
    beta = cmdp.mean_costs @ (oracle.y.y - y0)
    rho, xi, phi = chain.min_occupation, chain.mixing_time, chain.phi

    messages = []
    premises = alpha > 0 and bool(np.all(beta > 0))
    if not premises:
        messages.append(f"regret-bound premises unmet: alpha={alpha:.4g}, beta={np.round(beta, 4).tolist()}")
    log_arg = phi * S * A * K / delta
    zeta = rho * h - math.sqrt(72 * xi * rho * h * math.log(log_arg)) if log_arg > 1 else rho * h
    delta_ok = delta <= phi * S * A * K * math.exp(-rho * h / (288 * xi))
    if not delta_ok:
        messages.append("delta exceeds phi*S*A*K*exp(-rho*h/(288*xi))")
    for msg in messages:
        warnings.warn(msg, DiagnosticWarning, stacklevel=2)

    ks = np.arange(1, K + 1)
    horizons = h * ks * (ks + 1) // 2
    if premises and rho > 0:
        ratio = 2 * alpha * m / float(beta.min()) + 1
        logs = np.log(S * A * (m + 1) * math.pi**2 / (3 * delta)) + 3 * np.log(horizons)
        bound = 2 * h * ks + 2 * ratio * h * S * A * np.sqrt(logs / (rho * h)) * (ks - 1) * np.sqrt(ks / 2)
    else:
        bound = np.full(K, np.nan)
    return RegretDiagnostics(alpha, beta, rho, xi, phi, zeta, premises, delta_ok, horizons, bound, messages)


@dataclass
class SlopeFit:
    slope: float
    status: str  # "ok" or "dominating" (regret never positive in the window)


def regret_slope(curve, window: float = 0.5, T=None) -> SlopeFit:
    """Least-squares slope of ``log curve`` against ``log T`` over the trailing window.

    Args:
        curve: cumulative regret values.
        window: trailing fraction of the points to fit.
        T: horizons matching ``curve``; defaults to ``1..len(curve)``.
    """
    curve = np.asarray(curve, dtype=float)
    T = np.arange(1, curve.size + 1, dtype=float) if T is None else np.asarray(T, dtype=float)
    if not 0 < window <= 1:
        raise ValueError("window must lie in (0, 1]")
    start = int(math.floor(curve.size * (1 - window)))
    c, t = curve[start:], T[start:]
    if c.size < 2 or np.any(c <= 0):
        return SlopeFit(float("nan"), "dominating")
    slope = np.polyfit(np.log(t), np.log(c), 1)[0]
    return SlopeFit(float(slope), "ok")


@dataclass
class WideningCheck:
    """Outcome of comparing a planning LP with its widened counterpart."""

    gap: float  # r^T (y1 - y2)
    bound: float  # 2 alpha / beta * |eps_c|_1 + |eps_r|_1
    alpha: float
    beta: float

    @property
    def holds(self) -> bool:
        return self.gap <= self.bound + 1e-7


def widening_check(cmdp: Cmdp, eps_r, eps_c, y0) -> WideningCheck | None:
    """Check the reward loss caused by widening rewards and costs.

    ``y1`` solves the LP with the true means, ``y2`` the one with rewards
    ``r + eps_r`` and costs ``c + eps_c``. ``y0`` must satisfy the widened
    constraints with ``alpha = r^T (y1 - y0) > 0`` and
    ``beta_i = c_i^T (y1 - y0) > 0`` for every constraint; with several
    constraints the smallest ``beta_i`` is used. Returns ``None`` when
    either LP is infeasible or the premises fail.
    """
    y0 = _y(y0)
    eps_r = np.asarray(eps_r, dtype=float)
    eps_c = np.atleast_2d(np.asarray(eps_c, dtype=float))
    r, c, d = cmdp.mean_reward, cmdp.mean_costs, cmdp.budgets
    p1 = solve_robust(cmdp.P, cmdp.A, r, c, d)
    p2 = solve_robust(cmdp.P, cmdp.A, r + eps_r, c + eps_c, d)
    if not (p1.feasible and p2.feasible):
        return None
    if np.any((c + eps_c) @ y0 > d + 1e-12):
        return None
    y1, y2 = p1.y.y, p2.y.y
    alpha = float(r @ (y1 - y0))
    beta = c @ (y1 - y0)
    if alpha <= 0 or np.any(beta <= 0):
        return None
    b = float(beta.min())
    bound = 2 * alpha / b * float(np.abs(eps_c).sum()) + float(np.abs(eps_r).sum())
    return WideningCheck(float(r @ (y1 - y2)), bound, alpha, b)
