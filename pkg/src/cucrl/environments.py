"""Sampled CMDP environments with Bernoulli rewards and costs.

An :class:`Environment` owns the true CMDP and only uses its means to draw
samples. Learners read the known pieces (kernel, budgets, sizes) through
the environment's properties; the ``cmdp`` attribute is reserved for
oracle computations in the harness.
"""

from __future__ import annotations

import numpy as np

from .cmdp import Cmdp, CmdpError, Policy

# two-armed bandit whose constrained optimum pulls arm one w.p. 0.75
BANDIT_REWARDS = (0.9, 0.7)
BANDIT_COSTS = ((0.4, 0.0),)
BANDIT_BUDGETS = (0.3,)

# three-state cycle: action 0 stays, action 1 navigates to the next state
THREE_STATE_NAV_REWARDS = (0.5, 0.6, 0.7)
THREE_STATE_NAV_COSTS = (0.3, 0.3, 0.3)
THREE_STATE_BUDGET = 0.2
STAY, NAVIGATE = 0, 1

# grid actions
NORTH, EAST, SOUTH, WEST = range(4)
_MOVES = {NORTH: (-1, 0), EAST: (0, 1), SOUTH: (1, 0), WEST: (0, -1)}

# short route north through a costly cell, long route east/north/west for free
TWO_ROUTE_MAP = """\
D..
9..
O..
"""


class Environment:
    """Simulator for a CMDP with Bernoulli rewards and costs.

    Args:
        cmdp: true model; its means parameterize the Bernoulli draws.
        initial_state: state entered by :meth:`reset`.
        seed: seed for the sampling generator.
        baseline: exploration policy suggested for this environment.
        name: label used in logs and file names.
    """

    def __init__(self, cmdp: Cmdp, initial_state: int = 0, seed=None, baseline: Policy | None = None, name: str = "cmdp"):
        if not 0 <= initial_state < cmdp.S:
            raise CmdpError(f"initial state {initial_state} out of range")
        self.cmdp = cmdp
        self.initial_state = int(initial_state)
        self.name = name
        self.baseline = baseline if baseline is not None else Policy.uniform(cmdp.S, cmdp.A)
        self._cum_P = np.cumsum(cmdp.P, axis=1)
        self._r = cmdp.mean_reward
        self._c = cmdp.mean_costs.T.copy()
        self.rng = np.random.default_rng(seed)
        self.current_state = self.initial_state

    @property
    def S(self) -> int:
        return self.cmdp.S

    @property
    def A(self) -> int:
        return self.cmdp.A

    @property
    def m(self) -> int:
        return self.cmdp.m

    @property
    def kernel(self) -> np.ndarray:
        """Known ``(S*A, S)`` transition matrix."""
        return self.cmdp.P

    @property
    def budgets(self) -> np.ndarray:
        return self.cmdp.budgets

    def reset(self, seed=None) -> int:
        """Return to the initial state, optionally reseeding the generator."""
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self.current_state = self.initial_state
        return self.current_state

    def step(self, a: int) -> tuple[int, float, np.ndarray]:
        """Take action ``a``; returns ``(next_state, reward, costs)``."""
        if not 0 <= a < self.A:
            raise CmdpError(f"invalid action {a}")
        i = self.current_state * self.A + a
        u = self.rng.random(2 + self.m)
        nxt = min(int(np.searchsorted(self._cum_P[i], u[0], side="right")), self.S - 1)
        reward = 1.0 if u[1] < self._r[i] else 0.0
        costs = (u[2:] < self._c[i]).astype(float)
        self.current_state = nxt
        return nxt, reward, costs


def make_bandit(means_r=BANDIT_REWARDS, means_c=BANDIT_COSTS, d=BANDIT_BUDGETS, seed=None) -> Environment:
    """Constrained multi-armed bandit as a one-state CMDP."""
    means_r = np.asarray(means_r, dtype=float)
    A = means_r.size
    cmdp = Cmdp(1, A, np.ones((A, 1)), means_r, np.atleast_2d(means_c), np.atleast_1d(d))
    return Environment(cmdp, seed=seed, name="bandit")


def make_three_state(
    stay_reward: float = 0.0,
    nav_means_r=THREE_STATE_NAV_REWARDS,
    nav_means_c=THREE_STATE_NAV_COSTS,
    d: float = THREE_STATE_BUDGET,
    stay_cost: float = 0.0,
    seed=None,
) -> Environment:
    """Three states on a cycle with a safe "stay" and a risky "navigate" action.

    Staying self-loops; navigating moves deterministically from ``s`` to
    ``(s + 1) % 3``. The suggested baseline stays with probability 0.8.
    """
    S, A = 3, 2
    P = np.zeros((S * A, S))
    r = np.zeros(S * A)
    c = np.zeros(S * A)
    for s in range(S):
        P[s * A + STAY, s] = 1.0
        P[s * A + NAVIGATE, (s + 1) % S] = 1.0
        r[s * A + STAY] = stay_reward
        c[s * A + STAY] = stay_cost
        r[s * A + NAVIGATE] = nav_means_r[s]
        c[s * A + NAVIGATE] = nav_means_c[s]
    cmdp = Cmdp(S, A, P, r, c[None, :], [d])
    baseline = Policy(np.tile([0.8, 0.2], (S, 1)))
    return Environment(cmdp, seed=seed, baseline=baseline, name="three_state")


def parse_grid(text: str) -> tuple[int, int, np.ndarray, int, int]:
    """Parse an ASCII grid map.

    ``O`` marks the origin, ``D`` the destination, a digit ``k`` a cell with
    mean cost ``k / 10`` and ``.`` a free cell. Returns
    ``(width, height, cost_map, origin, destination)`` with cells numbered
    row-major from the top-left corner.
    """
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise CmdpError("empty grid map")
    width = len(lines[0])
    if any(len(ln) != width for ln in lines):
        raise CmdpError("grid rows have different lengths")
    height = len(lines)
    cost_map = np.zeros(width * height)
    origin = destination = None
    for row, ln in enumerate(lines):
        for col, ch in enumerate(ln):
            cell = row * width + col
            if ch == "O":
                if origin is not None:
                    raise CmdpError("more than one origin")
                origin = cell
            elif ch == "D":
                if destination is not None:
                    raise CmdpError("more than one destination")
                destination = cell
            elif ch.isdigit():
                cost_map[cell] = int(ch) / 10.0
            elif ch != ".":
                raise CmdpError(f"unknown grid symbol {ch!r}")
    if origin is None or destination is None:
        raise CmdpError("grid needs exactly one O and one D")
    return width, height, cost_map, origin, destination


def make_gridworld(width: int, height: int, slip: float, cost_map, origin: int, destination: int, d, seed=None) -> Environment:
    """Grid navigation with slip, a per-cell cost and a rewarding destination.

    Each move reaches the intended neighbor with probability ``1 - slip`` and
    one of the other three neighbors with probability ``slip / 3`` each;
    moves off the grid leave the agent in place. Every action at the
    destination pays reward 1 and teleports back to the origin. The cost of
    ``(s, a)`` is the mean cost of cell ``s``.
    """
    if not 0.0 <= slip <= 1.0:
        raise CmdpError("slip must be a probability")
    S, A = width * height, 4
    cost_map = np.asarray(cost_map, dtype=float).reshape(-1)
    if cost_map.size != S:
        raise CmdpError(f"cost map needs {S} entries")
    if origin == destination or not (0 <= origin < S and 0 <= destination < S):
        raise CmdpError("origin and destination must be distinct cells")

    def neighbor(cell: int, move: int) -> int:
        row, col = divmod(cell, width)
        dr, dc = _MOVES[move]
        nr, nc = row + dr, col + dc
        if 0 <= nr < height and 0 <= nc < width:
            return nr * width + nc
        return cell

    P = np.zeros((S * A, S))
    r = np.zeros(S * A)
    for s in range(S):
        for a in range(A):
            i = s * A + a
            if s == destination:
                P[i, origin] = 1.0
                r[i] = 1.0
                continue
            for move in range(A):
                P[i, neighbor(s, move)] += (1.0 - slip) if move == a else slip / 3.0
    c = np.repeat(cost_map, A)[None, :]
    cmdp = Cmdp(S, A, P, r, c, np.atleast_1d(d))
    return Environment(cmdp, initial_state=origin, seed=seed, name="gridworld")


def gridworld_from_ascii(text: str, slip: float = 0.1, d=0.1, seed=None) -> Environment:
    width, height, cost_map, origin, destination = parse_grid(text)
    return make_gridworld(width, height, slip, cost_map, origin, destination, d, seed=seed)


def from_cmdp(cmdp: Cmdp, initial_state: int = 0, seed=None, baseline: Policy | None = None) -> Environment:
    return Environment(cmdp, initial_state=initial_state, seed=seed, baseline=baseline)
