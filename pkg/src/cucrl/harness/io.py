"""CSV files for runs: one row per step and one row per episode.

Floats are written with ``repr`` so reading a file back yields the exact
values that were written.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..agents import EpisodeRecord, RunLog
from ..cmdp import Cmdp, Policy
from ..planner import PlanResult
from .metrics import EpisodeMetrics, EpisodeScorer, Metrics, apportion_regret, compute_metrics, running_average

STEPS_FILE = "steps.csv"
EPISODES_FILE = "episodes.csv"


def steps_header(m: int) -> list[str]:
    return ["t", "episode", "phase", "state", "action", "reward"] + [f"cost_{i}" for i in range(m)]


def episodes_header(m: int) -> list[str]:
    return (
        ["k", "t_k", "rlp_status", "delta_k", "cum_regret"]
        + [f"true_cost_{i}" for i in range(m)]
        + [f"violation_flag_{i}" for i in range(m)]
    )


def _step_row(t, k, phase, s, a, r, costs) -> list:
    return [int(t), int(k), int(phase), int(s), int(a), repr(float(r))] + [repr(float(c)) for c in costs]


def _episode_row(e: EpisodeMetrics) -> list:
    return (
        [e.k, e.t_k, e.rlp_status, repr(float(e.delta_k)), repr(float(e.cum_regret))]
        + [repr(float(c)) for c in e.true_costs]
        + [int(f) for f in e.violation_flags]
    )


def write_run(log: RunLog, cmdp: Cmdp, directory, oracle: PlanResult | None = None) -> Metrics:
    """Write ``steps.csv`` and ``episodes.csv`` for a finished run; returns its metrics."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    metrics = compute_metrics(log, cmdp, oracle)
    st = log.steps
    with open(directory / STEPS_FILE, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(steps_header(log.m))
        for j in range(len(st)):
            w.writerow(_step_row(st.t[j], st.episode[j], st.phase[j], st.state[j], st.action[j], st.reward[j], st.costs[j]))
    with open(directory / EPISODES_FILE, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(episodes_header(log.m))
        w.writerows(_episode_row(e) for e in metrics.per_episode)
    return metrics


class CsvSink:
    """Streams a run to CSV while it executes.

    Steps are flushed at every episode boundary, so a long run can be
    inspected mid-flight. Produces the same files as :func:`write_run`.
    """

    def __init__(self, directory, cmdp: Cmdp, baseline: Policy, h: int, oracle: PlanResult | None = None):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.scorer = EpisodeScorer(cmdp, baseline, h, oracle)
        self._steps_fh = open(self.directory / STEPS_FILE, "w", newline="")
        self._episodes_fh = open(self.directory / EPISODES_FILE, "w", newline="")
        self._steps = csv.writer(self._steps_fh)
        self._episodes = csv.writer(self._episodes_fh)
        self._steps.writerow(steps_header(cmdp.m))
        self._episodes.writerow(episodes_header(cmdp.m))

    def on_step(self, t, k, phase, s, a, r, costs) -> None:
        self._steps.writerow(_step_row(t, k, phase, s, a, r, costs))

    def on_episode(self, record: EpisodeRecord) -> None:
        self._episodes.writerow(_episode_row(self.scorer.score(record)))
        self._steps_fh.flush()
        self._episodes_fh.flush()

    def close(self) -> None:
        self._steps_fh.close()
        self._episodes_fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _read(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path} is empty")
    return rows[0], rows[1:]


def read_steps(path) -> dict[str, np.ndarray]:
    """Columns of a steps file; costs come back as one ``(T, m)`` array."""
    header, rows = _read(path)
    m = len(header) - 6
    if header != steps_header(m):
        raise ValueError(f"{path}: unexpected steps header {header}")
    data = np.array(rows, dtype=object).reshape(len(rows), len(header))
    cols = {name: data[:, j] for j, name in enumerate(header[:6])}
    out = {name: cols[name].astype(np.int64) for name in ("t", "episode", "phase", "state", "action")}
    out["reward"] = cols["reward"].astype(float)
    out["costs"] = data[:, 6:].astype(float).reshape(len(rows), m)
    return out


def read_episodes(path) -> list[EpisodeMetrics]:
    header, rows = _read(path)
    m = (len(header) - 5) // 2
    if header != episodes_header(m):
        raise ValueError(f"{path}: unexpected episodes header {header}")
    return [
        EpisodeMetrics(
            k=int(row[0]),
            t_k=int(row[1]),
            rlp_status=row[2],
            delta_k=float(row[3]),
            cum_regret=float(row[4]),
            true_costs=np.array([float(v) for v in row[5 : 5 + m]]),
            violation_flags=np.array([bool(int(v)) for v in row[5 + m :]], dtype=bool),
        )
        for row in rows
    ]


def metrics_from_csv(directory) -> Metrics:
    """Rebuild :class:`Metrics` from a run directory without the true CMDP."""
    directory = Path(directory)
    steps = read_steps(directory / STEPS_FILE)
    per_episode = read_episodes(directory / EPISODES_FILE)
    deltas = {e.k: e.delta_k for e in per_episode}
    return Metrics(per_episode, apportion_regret(steps["episode"], deltas), running_average(steps["costs"]))
