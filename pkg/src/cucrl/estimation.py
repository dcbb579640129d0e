"""Visit counts, running sums and Hoeffding-style confidence widening."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


def radius(t_k, N, S: int, A: int, m: int, delta: float):
    """Confidence half-width for a mean estimated from ``N`` samples.

    ``sqrt(log(S*A*(m+1)*pi^2*t_k^3 / (3*delta)) / (2*max(1, N)))``. Here
    ``pi`` is the circle constant, not a policy. Works elementwise on arrays
    of counts.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if np.any(np.asarray(t_k) < 1):
        raise ValueError("t_k must be at least 1")
    # log of a product, kept in log space so huge t_k does not overflow
    log_term = (
        math.log(S * A * (m + 1) * math.pi**2 / (3.0 * delta)) + 3.0 * np.log(np.asarray(t_k, dtype=float))
    )
    width = np.sqrt(log_term / (2.0 * np.maximum(1, np.asarray(N, dtype=float))))
    return float(width) if np.ndim(width) == 0 else width


def rs_radius(t_k, N, S: int, A: int, delta: float):
    """Exploration bonus of the scalarized UCRL2 baseline,
    ``sqrt(7 log(2 S A t_k / delta) / (2 max(1, N)))``."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    log_term = math.log(2.0 * S * A * t_k / delta)
    width = np.sqrt(7.0 * log_term / (2.0 * np.maximum(1, np.asarray(N, dtype=float))))
    return float(width) if np.ndim(width) == 0 else width


@dataclass
class Estimator:
    """Running statistics of observed rewards and costs.

    ``t`` follows the learner's clock: it starts at 1 and every observed
    transition advances it, so ``N.sum() == t - 1``.
    """

    S: int
    A: int
    m: int
    N: np.ndarray = field(default=None)
    R: np.ndarray = field(default=None)
    C: np.ndarray = field(default=None)
    t: int = 1

    def __post_init__(self):
        n = self.S * self.A
        self.N = np.zeros(n, dtype=np.int64) if self.N is None else np.asarray(self.N, dtype=np.int64)
        self.R = np.zeros(n) if self.R is None else np.asarray(self.R, dtype=float)
        self.C = np.zeros((self.m, n)) if self.C is None else np.asarray(self.C, dtype=float).reshape(self.m, n)

    def update(self, s: int, a: int, reward: float, costs=()) -> "Estimator":
        """Record one observation at ``(s, a)``; returns ``self``."""
        costs = np.asarray(costs, dtype=float).reshape(-1)
        if costs.shape != (self.m,):
            raise ValueError(f"expected {self.m} costs, got {costs.shape[0]}")
        if not 0.0 <= reward <= 1.0 or np.any(costs < 0.0) or np.any(costs > 1.0):
            raise ValueError(f"observation out of [0, 1]: reward={reward}, costs={costs.tolist()}")
        i = s * self.A + a
        self.N[i] += 1
        self.R[i] += reward
        self.C[:, i] += costs
        self.t += 1
        return self

    def empirical_means(self) -> tuple[np.ndarray, np.ndarray]:
        """``R / max(1, N)`` and ``C_i / max(1, N)``; unvisited pairs read 0."""
        denom = np.maximum(1, self.N)
        return self.R / denom, self.C / denom

    def radii(self, delta: float, t_k: int | None = None) -> np.ndarray:
        return radius(self.t if t_k is None else t_k, self.N, self.S, self.A, self.m, delta)

    def optimistic_values(self, delta: float, t_k: int | None = None, scale: float = 1.0):
        """Upward-widened reward and cost tables, capped at 1.

        Widening the reward is optimism; widening the cost is pessimism
        because costs only enter as upper-bounded constraints. ``scale``
        multiplies the radius (1 in normal use, 0 to plan on point estimates).
        """
        r_hat, c_hat = self.empirical_means()
        w = scale * self.radii(delta, t_k)
        return np.minimum(r_hat + w, 1.0), np.minimum(c_hat + w, 1.0)

    def to_dict(self) -> dict:
        return {
            "S": self.S,
            "A": self.A,
            "m": self.m,
            "t": self.t,
            "N": self.N.tolist(),
            "R": self.R.tolist(),
            "C": self.C.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Estimator":
        return cls(doc["S"], doc["A"], doc["m"], doc["N"], doc["R"], doc["C"], doc["t"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Estimator":
        return cls.from_dict(json.loads(text))
