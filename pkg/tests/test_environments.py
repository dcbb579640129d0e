import math

import numpy as np
import pytest

from cucrl.cmdp import Cmdp, CmdpError, Policy, stationary_occupation
from cucrl.environments import (
    EAST,
    NAVIGATE,
    NORTH,
    STAY,
    TWO_ROUTE_MAP,
    Environment,
    gridworld_from_ascii,
    make_bandit,
    make_gridworld,
    make_three_state,
    parse_grid,
)
from cucrl.planner import solve_cmdp


def _deterministic_env(seed=0):
    cmdp = Cmdp(1, 2, np.ones((2, 1)), [1.0, 0.0], [[0.0, 1.0]], [0.5])
    return Environment(cmdp, seed=seed)


class TestStep:
    def test_certain_reward_and_cost(self):
        env = _deterministic_env()
        for _ in range(100):
            _, r, c = env.step(0)
            assert r == 1.0 and c[0] == 0.0
            _, r, c = env.step(1)
            assert r == 0.0 and c[0] == 1.0

    def test_same_seed_same_samples(self):
        a, b = make_three_state(seed=11), make_three_state(seed=11)
        actions = np.random.default_rng(0).integers(0, 2, 300)
        for act in actions:
            sa, ra, ca = a.step(int(act))
            sb, rb, cb = b.step(int(act))
            assert (sa, ra) == (sb, rb) and np.array_equal(ca, cb)

    def test_reset_with_seed_replays(self):
        env = make_three_state()
        env.reset(seed=5)
        first = [env.step(1)[1] for _ in range(50)]
        env.reset(seed=5)
        assert [env.step(1)[1] for _ in range(50)] == first

    def test_invalid_action(self):
        with pytest.raises(CmdpError):
            make_bandit().step(2)

    def test_invalid_initial_state(self):
        with pytest.raises(CmdpError):
            Environment(make_bandit().cmdp, initial_state=3)

    def test_sample_means_within_three_sigma(self):
        env = make_bandit(seed=2)
        n = 100_000
        draws = np.array([np.concatenate([[env.step(0)[1]], env.step(0)[2]]) for _ in range(n // 2)])
        # two draws per loop iteration: the reward of the first, the cost of the second
        for mean, col in ((0.9, 0), (0.4, 1)):
            sigma = math.sqrt(mean * (1 - mean) / draws.shape[0])
            assert abs(draws[:, col].mean() - mean) <= 3 * sigma

    def test_visit_frequencies_match_stationary_marginal(self):
        env = make_three_state(seed=3)
        pol = env.baseline
        rng = np.random.default_rng(4)
        thin, n = 20, 100_000
        counts = np.zeros(3)
        for t in range(n):
            s = env.current_state
            if t % thin == 0:
                counts[s] += 1
            env.step(int(rng.random() < pol.probs[s, NAVIGATE]))
        expected = stationary_occupation(env.cmdp, pol).state_marginal() * counts.sum()
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        # 99.9% quantile of chi-square with 2 degrees of freedom
        assert chi2 < -2 * math.log(0.001)


class TestBandit:
    def test_reference_optimum(self):
        np.testing.assert_allclose(solve_cmdp(make_bandit().cmdp).y.y, [0.75, 0.25], atol=1e-12)

    @pytest.mark.parametrize("d", [0.4, 0.7, 1.0])
    def test_loose_budget(self, d):
        np.testing.assert_allclose(solve_cmdp(make_bandit(d=[d]).cmdp).y.y, [1.0, 0.0], atol=1e-12)


class TestThreeStateEnv:
    def test_kernel(self):
        K = make_three_state().cmdp.kernel()
        for s in range(3):
            np.testing.assert_array_equal(K[s, STAY], np.eye(3)[s])
            np.testing.assert_array_equal(K[s, NAVIGATE], np.eye(3)[(s + 1) % 3])

    def test_staying_is_free(self):
        cmdp = make_three_state().cmdp
        stay = np.arange(3) * 2 + STAY
        assert not cmdp.mean_reward[stay].any() and not cmdp.mean_costs[0, stay].any()
        np.testing.assert_array_equal(cmdp.budgets, [0.2])


class TestGrid:
    def test_parse(self):
        w, h, costs, o, d = parse_grid("D.\n9O\n")
        assert (w, h, o, d) == (2, 2, 3, 0)
        np.testing.assert_allclose(costs, [0, 0, 0.9, 0])

    @pytest.mark.parametrize("text", ["", "O.\nD", "OO\nD.", "O.X\nD..", "O..\n..."])
    def test_malformed_maps(self, text):
        with pytest.raises(CmdpError):
            parse_grid(text)

    def test_corridor_average_reward(self):
        env = make_gridworld(3, 1, 0.0, np.zeros(3), origin=0, destination=2, d=[1.0])
        assert solve_cmdp(env.cmdp).value == pytest.approx(1 / 3, abs=1e-12)

    def test_free_grid_is_deterministic_shortest_cycle(self):
        env = gridworld_from_ascii("D..\n...\nO..", slip=0.0, d=1.0)
        plan = solve_cmdp(env.cmdp)
        # origin -> two moves north -> destination -> origin
        assert plan.value == pytest.approx(1 / 3, abs=1e-12)
        support = np.flatnonzero(plan.y.state_marginal() > 0)
        assert plan.policy.is_deterministic(states=support)

    def test_slip_spreads_to_other_neighbors(self):
        env = make_gridworld(3, 3, 0.3, np.zeros(9), origin=4, destination=0, d=[1.0])
        row = env.cmdp.kernel()[4, NORTH]
        np.testing.assert_allclose(row[[1, 5, 7, 3]], [0.7, 0.1, 0.1, 0.1])

    def test_walls_reflect(self):
        env = make_gridworld(2, 1, 0.0, np.zeros(2), origin=0, destination=1, d=[1.0])
        assert env.cmdp.kernel()[0, NORTH, 0] == 1.0
        assert env.cmdp.kernel()[0, EAST, 1] == 1.0

    def test_destination_teleports_with_reward(self):
        env = gridworld_from_ascii(TWO_ROUTE_MAP)
        cmdp = env.cmdp
        dest = 0
        for a in range(4):
            assert cmdp.mean_reward[dest * 4 + a] == 1.0
            assert cmdp.kernel()[dest, a, env.initial_state] == 1.0

    def test_two_routes_mix_under_tight_budget(self):
        env = gridworld_from_ascii(TWO_ROUTE_MAP, slip=0.1, d=0.1)
        plan = solve_cmdp(env.cmdp)
        loose = solve_cmdp(gridworld_from_ascii(TWO_ROUTE_MAP, slip=0.1, d=1.0).cmdp)
        free = solve_cmdp(gridworld_from_ascii(TWO_ROUTE_MAP.replace("9", "."), slip=0.1, d=1.0).cmdp)
        support = np.flatnonzero(plan.y.state_marginal() > 0)
        assert not plan.policy.is_deterministic(states=support)
        assert env.cmdp.mean_costs[0] @ plan.y.y == pytest.approx(0.1, abs=1e-9)
        # strictly between the never-costly and always-short extremes
        assert plan.value < loose.value
        assert loose.value == pytest.approx(free.value, abs=1e-12)

    def test_baseline_is_uniform(self):
        env = gridworld_from_ascii(TWO_ROUTE_MAP)
        assert env.baseline == Policy.uniform(9, 4)
