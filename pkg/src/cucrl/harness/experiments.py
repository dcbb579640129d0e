"""Build environments and agents from configs; run single experiments and sweeps."""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..agents import CucrlConfig, RunLog, run_cucrl, run_rs_ucrl2
from ..cmdp import Cmdp, Policy
from ..environments import (
    BANDIT_BUDGETS,
    BANDIT_COSTS,
    BANDIT_REWARDS,
    THREE_STATE_BUDGET,
    THREE_STATE_NAV_COSTS,
    THREE_STATE_NAV_REWARDS,
    Environment,
    from_cmdp,
    gridworld_from_ascii,
    make_bandit,
    make_three_state,
)
from . import io
from .config import ConfigError
from .metrics import Metrics, compute_metrics, oracle_plan, violation_probability

logger = logging.getLogger(__name__)


def build_env(env_spec: dict) -> Environment:
    kind = env_spec["kind"]
    if kind == "bandit":
        return make_bandit(
            env_spec.get("means_r", BANDIT_REWARDS), env_spec.get("means_c", BANDIT_COSTS), env_spec.get("d", BANDIT_BUDGETS)
        )
    if kind == "three_state":
        return make_three_state(
            stay_reward=env_spec.get("stay_reward", 0.0),
            nav_means_r=env_spec.get("nav_means_r", THREE_STATE_NAV_REWARDS),
            nav_means_c=env_spec.get("nav_means_c", THREE_STATE_NAV_COSTS),
            d=env_spec.get("d", THREE_STATE_BUDGET),
            stay_cost=env_spec.get("stay_cost", 0.0),
        )
    if kind == "gridworld":
        return gridworld_from_ascii(env_spec["map"], slip=env_spec.get("slip", 0.1), d=env_spec.get("d", 0.1))
    if kind == "cmdp":
        cmdp = Cmdp.from_json(Path(env_spec["path"])) if "path" in env_spec else Cmdp.from_dict(env_spec["cmdp"])
        return from_cmdp(cmdp, initial_state=env_spec.get("initial_state", 0))
    raise ConfigError(f"unknown environment kind {kind!r}")


def agent_config(cfg: dict, env: Environment) -> CucrlConfig:
    baseline = None
    if "baseline" in cfg:
        baseline = Policy(np.asarray(cfg["baseline"], dtype=float))
        if baseline.probs.shape != (env.S, env.A):
            raise ConfigError(f"baseline must be {env.S} x {env.A}")
    return CucrlConfig(
        delta=cfg["delta"],
        h=cfg["h"],
        K=cfg["K"],
        baseline=baseline,
        seed=cfg["seed"],
        max_fallback_blocks=cfg["max_fallback_blocks"],
    )


def _lambda(cfg: dict, env: Environment):
    if "lambda" not in cfg:
        raise ConfigError("agent rs_ucrl2 needs a lambda vector")
    lam = np.asarray(cfg["lambda"], dtype=float)
    if lam.shape != (env.m,):
        raise ConfigError(f"lambda needs {env.m} entries")
    return lam


def run_agent(env: Environment, cfg: dict, sink=None) -> RunLog:
    acfg = agent_config(cfg, env)
    if cfg["agent"] == "cucrl":
        return run_cucrl(env, acfg, sink)
    return run_rs_ucrl2(env, acfg, _lambda(cfg, env), sink)


@dataclass
class RunResult:
    config: dict
    log: RunLog
    metrics: Metrics


def run_one(cfg: dict, out_dir=None) -> RunResult:
    """Run one agent with one seed. With ``out_dir`` the run streams to CSV there."""
    env = build_env(cfg["env"])
    oracle = oracle_plan(env.cmdp)
    if out_dir is None:
        log = run_agent(env, cfg)
    else:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "config.json").write_text(json.dumps(cfg, indent=2) + "\n")
        acfg = agent_config(cfg, env)
        baseline = acfg.baseline if acfg.baseline is not None else env.baseline
        with io.CsvSink(out_dir, env.cmdp, baseline, cfg["h"], oracle) as sink:
            log = run_agent(env, cfg, sink)
    return RunResult(cfg, log, compute_metrics(log, env.cmdp, oracle))


def _sweep_worker(job: tuple[dict, str | None]) -> RunResult:
    cfg, out = job
    return run_one(cfg, out)


@dataclass
class SweepResult:
    runs: list[RunResult]
    violation: dict[tuple, np.ndarray]  # lambda tuple (empty for C-UCRL) -> per-constraint probability


def sweep_jobs(cfg: dict) -> list[dict]:
    seeds = cfg.get("seeds", [cfg["seed"]])
    if cfg["agent"] == "rs_ucrl2":
        lambdas = cfg.get("lambdas", [cfg["lambda"]] if "lambda" in cfg else None)
        if lambdas is None:
            raise ConfigError("rs_ucrl2 sweep needs 'lambdas' or 'lambda'")
    else:
        lambdas = [None]
    jobs = []
    for lam in lambdas:
        for seed in seeds:
            job = dict(cfg, seed=seed)
            job.pop("seeds", None)
            job.pop("lambdas", None)
            if lam is not None:
                job["lambda"] = list(lam)
            jobs.append(job)
    return jobs


def _run_name(job: dict) -> str:
    lam = job.get("lambda") if job["agent"] == "rs_ucrl2" else None
    tag = "" if lam is None else "_lam" + "-".join(f"{v:g}" for v in lam)
    return f"{job['agent']}{tag}_seed{job['seed']}"


def sweep(cfg: dict, out_dir=None, workers: int = 1) -> SweepResult:
    """Run every (lambda, seed) combination, in parallel when ``workers > 1``.

    Results are reduced in job order after all runs finish, so the summary
    does not depend on completion order.
    """
    jobs = sweep_jobs(cfg)
    outs = [None if out_dir is None else str(Path(out_dir) / _run_name(j)) for j in jobs]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_sweep_worker, zip(jobs, outs)))
    else:
        runs = [_sweep_worker(job) for job in zip(jobs, outs)]

    cmdp = build_env(cfg["env"]).cmdp
    groups: dict[tuple, list[RunLog]] = {}
    for run in runs:
        key = tuple(run.config.get("lambda", ())) if run.config["agent"] == "rs_ucrl2" else ()
        groups.setdefault(key, []).append(run.log)
    violation = {key: violation_probability(logs, cmdp) for key, logs in groups.items()}
    result = SweepResult(runs, violation)
    if out_dir is not None:
        write_sweep_summary(result, out_dir, cmdp.m)
    return result


def write_sweep_summary(result: SweepResult, out_dir, m: int) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["run", "agent", "lambda", "seed", "T", "total_regret"] + [f"violation_rate_{i}" for i in range(m)])
        for run in result.runs:
            c = run.config
            flags = np.array([e.violation_flags for e in run.metrics.per_episode]).reshape(-1, m)
            w.writerow(
                [_run_name(c), c["agent"], " ".join(f"{v:g}" for v in c.get("lambda", [])) if c["agent"] == "rs_ucrl2" else "",
                 c["seed"], run.log.T, repr(run.metrics.total_regret)]
                + [repr(float(v)) for v in flags.mean(axis=0)]
            )
    with open(out_dir / "violation.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda"] + [f"violation_probability_{i}" for i in range(m)])
        for key, probs in result.violation.items():
            w.writerow([" ".join(f"{v:g}" for v in key)] + [repr(float(p)) for p in probs])
