"""Episodic optimistic learners for CMDPs with a known kernel.

Episode ``k`` of both learners runs the baseline policy for ``h`` steps,
re-plans from the statistics gathered so far, then runs the planned policy
for ``(k - 1) * h`` steps. Episode 1 therefore has no learned phase.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .cmdp import ChainError, Cmdp, OccupationMeasure, Policy, chain_diagnostics
from .environments import Environment
from .estimation import Estimator, rs_radius
from .planner import PlanResult, solve_robust

logger = logging.getLogger(__name__)


class Phase(enum.IntEnum):
    BASELINE = 0
    LEARNED = 1


class FeasibilityError(RuntimeError):
    """The robust LP stayed infeasible after the maximum number of extra baseline blocks."""

    def __init__(self, message: str, log: "RunLog"):
        super().__init__(message)
        self.log = log


class BaselineWarning(UserWarning):
    pass


@dataclass
class CucrlConfig:
    """Learner settings.

    Attributes:
        delta: confidence parameter in (0, 1).
        h: length of every baseline phase.
        K: number of episodes.
        baseline: exploration policy; ``None`` uses the environment's suggestion.
        seed: master seed; environment noise and action sampling get
            independent child streams.
        radius_scale: multiplier on the confidence radius (1 in normal use;
            0 plans on the point estimates, which tests use).
        max_fallback_blocks: cap on extra baseline blocks while the robust LP
            is infeasible.
    """

    delta: float = 0.1
    h: int = 50
    K: int = 30
    baseline: Policy | None = None
    seed: int = 0
    radius_scale: float = 1.0
    max_fallback_blocks: int = 100

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.h < 1 or self.K < 1:
            raise ValueError("h and K must be positive")
        if self.radius_scale < 0:
            raise ValueError("radius_scale must be nonnegative")


@dataclass
class StepTable:
    """Column arrays, one entry per environment step."""

    t: np.ndarray
    episode: np.ndarray
    phase: np.ndarray
    state: np.ndarray
    action: np.ndarray
    reward: np.ndarray
    costs: np.ndarray  # (T, m)

    def __len__(self) -> int:
        return self.t.size

    def __eq__(self, other):
        return isinstance(other, StepTable) and all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("t", "episode", "phase", "state", "action", "reward", "costs")
        )


@dataclass(eq=False)
class EpisodeRecord:
    k: int
    t_k: int
    y: OccupationMeasure | None
    policy: Policy | None
    rlp_status: str
    extra_baseline_steps: int = 0

    def __eq__(self, other):
        if not isinstance(other, EpisodeRecord):
            return NotImplemented
        same_y = (self.y is None and other.y is None) or (
            self.y is not None and other.y is not None and np.array_equal(self.y.y, other.y.y)
        )
        return (
            (self.k, self.t_k, self.rlp_status, self.extra_baseline_steps)
            == (other.k, other.t_k, other.rlp_status, other.extra_baseline_steps)
            and same_y
            and self.policy == other.policy
        )


@dataclass
class RunLog:
    agent: str
    S: int
    A: int
    m: int
    h: int
    baseline: Policy
    steps: StepTable
    episodes: list[EpisodeRecord] = field(default_factory=list)

    @property
    def T(self) -> int:
        return len(self.steps)


class Sink(Protocol):
    def on_step(self, t: int, k: int, phase: int, s: int, a: int, r: float, costs: np.ndarray) -> None: ...

    def on_episode(self, record: EpisodeRecord) -> None: ...


class _Recorder:
    def __init__(self, m: int, sink: Sink | None):
        self.m = m
        self.sink = sink
        self.cols: dict[str, list] = {k: [] for k in ("t", "episode", "phase", "state", "action", "reward", "costs")}
        self.episodes: list[EpisodeRecord] = []

    def step(self, t, k, phase, s, a, r, c):
        cols = self.cols
        cols["t"].append(t)
        cols["episode"].append(k)
        cols["phase"].append(phase)
        cols["state"].append(s)
        cols["action"].append(a)
        cols["reward"].append(r)
        cols["costs"].append(c)
        if self.sink is not None:
            self.sink.on_step(t, k, phase, s, a, r, c)

    def episode(self, record: EpisodeRecord):
        self.episodes.append(record)
        if self.sink is not None:
            self.sink.on_episode(record)

    def table(self) -> StepTable:
        c = self.cols
        costs = np.array(c["costs"], dtype=float).reshape(len(c["t"]), self.m)
        return StepTable(
            t=np.array(c["t"], dtype=np.int64),
            episode=np.array(c["episode"], dtype=np.int64),
            phase=np.array(c["phase"], dtype=np.int8),
            state=np.array(c["state"], dtype=np.int64),
            action=np.array(c["action"], dtype=np.int64),
            reward=np.array(c["reward"], dtype=float),
            costs=costs,
        )


def check_baseline(env: Environment, baseline: Policy, h: int, slack: float = 1.0) -> int:
    """Validate that the baseline mixes; warn when its mixing time exceeds ``h / slack``.

    Only the known kernel is used. Returns the mixing time.
    """
    kernel_only = Cmdp(env.S, env.A, env.kernel, np.zeros(env.S * env.A), np.zeros((0, env.S * env.A)), [])
    diag = chain_diagnostics(kernel_only, baseline)
    if diag.min_occupation <= 0:
        warnings.warn("baseline policy leaves some state-action pairs unvisited", BaselineWarning, stacklevel=3)
    if diag.mixing_time * slack > h:
        warnings.warn(
            f"baseline mixing time {diag.mixing_time} exceeds the baseline phase length h={h}",
            BaselineWarning,
            stacklevel=3,
        )
    return diag.mixing_time


def _execute(env, policy: Policy, n: int, rng, est: Estimator, rec: _Recorder, k: int, phase: Phase):
    if n <= 0:
        return
    cum = np.cumsum(policy.probs, axis=1)
    u = rng.random(n)
    A = env.A
    for j in range(n):
        s = env.current_state
        a = min(int(np.searchsorted(cum[s], u[j], side="right")), A - 1)
        t = est.t
        _, r, c = env.step(a)
        est.update(s, a, r, c)
        rec.step(t, k, int(phase), s, a, r, c)


def _run(env: Environment, cfg: CucrlConfig, agent: str, plan: Callable[[Estimator, int], PlanResult], sink: Sink | None, fallback: bool) -> RunLog:
    baseline = cfg.baseline if cfg.baseline is not None else env.baseline
    if baseline.probs.shape != (env.S, env.A):
        raise ValueError("baseline policy does not match the environment dimensions")
    try:
        check_baseline(env, baseline, cfg.h)
    except ChainError as exc:
        raise ValueError(f"baseline policy does not induce an ergodic chain: {exc}") from exc

    env_seq, policy_seq = np.random.SeedSequence(cfg.seed).spawn(2)
    env.reset(seed=env_seq)
    rng = np.random.default_rng(policy_seq)
    est = Estimator(env.S, env.A, env.m)
    rec = _Recorder(env.m, sink)

    def partial_log():
        return RunLog(agent, env.S, env.A, env.m, cfg.h, baseline, rec.table(), rec.episodes)

    for k in range(1, cfg.K + 1):
        _execute(env, baseline, cfg.h, rng, est, rec, k, Phase.BASELINE)
        extra = 0
        t_k = est.t
        result = plan(est, t_k)
        while not result.feasible:
            if not fallback:
                raise RuntimeError(f"{agent}: planning LP returned {result.status.value}")
            if extra >= cfg.max_fallback_blocks * cfg.h:
                raise FeasibilityError(
                    f"robust LP still infeasible after {cfg.max_fallback_blocks} extra baseline blocks in episode {k}",
                    partial_log(),
                )
            _execute(env, baseline, cfg.h, rng, est, rec, k, Phase.BASELINE)
            extra += cfg.h
            t_k = est.t
            result = plan(est, t_k)
        if extra:
            logger.info("episode %d: %d extra baseline steps before the robust LP became feasible", k, extra)
        rec.episode(EpisodeRecord(k, t_k, result.y, result.policy, result.status.value, extra))
        _execute(env, result.policy, (k - 1) * cfg.h, rng, est, rec, k, Phase.LEARNED)
    return partial_log()


def run_cucrl(env: Environment, cfg: CucrlConfig, sink: Sink | None = None) -> RunLog:
    """Constrained UCRL with the baseline fallback for infeasible robust LPs.

    Each episode plans with optimistic rewards and pessimistic costs. While
    the robust LP is infeasible the baseline runs for further blocks of
    ``h`` steps; after ``cfg.max_fallback_blocks`` blocks a
    :class:`FeasibilityError` carrying the partial log is raised.
    """

    def plan(est: Estimator, t_k: int) -> PlanResult:
        tilde_r, tilde_c = est.optimistic_values(cfg.delta, t_k, cfg.radius_scale)
        return solve_robust(env.kernel, env.A, tilde_r, tilde_c, env.budgets)

    return _run(env, cfg, "cucrl", plan, sink, fallback=True)


def run_rs_ucrl2(env: Environment, cfg: CucrlConfig, lam, sink: Sink | None = None) -> RunLog:
    """Risk-sensitive UCRL2 baseline on the scalarized signal ``r - lam^T c``.

    The planning LP ignores the cost constraints. Scalarized estimates are
    not clipped, only shifted up by the exploration bonus.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.shape != (env.m,) or np.any(lam < 0):
        raise ValueError(f"lambda must be a nonnegative vector of length {env.m}")
    no_costs = np.zeros((0, env.S * env.A))

    def plan(est: Estimator, t_k: int) -> PlanResult:
        denom = np.maximum(1, est.N)
        scalarized = (est.R - lam @ est.C) / denom
        tilde_r = scalarized + cfg.radius_scale * rs_radius(t_k, est.N, env.S, env.A, cfg.delta)
        return solve_robust(env.kernel, env.A, tilde_r, no_costs, [])

    return _run(env, cfg, "rs_ucrl2", plan, sink, fallback=False)
