import numpy as np
import pytest

from cucrl.cmdp import Cmdp, OccupationMeasure, Policy, average_value, stationary_occupation
from cucrl.environments import NAVIGATE, STAY, make_bandit, make_three_state
from cucrl.lp import LpStatus
from cucrl.planner import flow_constraints, recover_policy, solve_cmdp, solve_robust
from generators import random_cmdp
from oracles import bandit_single_constraint_optimum, lp_vertex_oracle


def _oracle_value(cmdp: Cmdp):
    eq, rhs = flow_constraints(cmdp.P, cmdp.A)
    return lp_vertex_oracle(cmdp.mean_reward, eq, rhs, cmdp.mean_costs if cmdp.m else None, cmdp.budgets if cmdp.m else None)


class TestSolveCmdp:
    def test_bandit_reference_optimum(self):
        cmdp = make_bandit().cmdp
        p, v = bandit_single_constraint_optimum((0.9, 0.7), (0.4, 0.0), 0.3)
        plan = solve_cmdp(cmdp)
        np.testing.assert_allclose(plan.y.y, [p, 1 - p], atol=1e-9)
        assert plan.value == pytest.approx(v, abs=1e-9)
        np.testing.assert_allclose(plan.policy.probs, [[0.75, 0.25]], atol=1e-12)

    def test_slack_budget_pulls_best_arm(self):
        plan = solve_cmdp(make_bandit(d=[1.0]).cmdp)
        np.testing.assert_allclose(plan.y.y, [1.0, 0.0])
        assert plan.value == pytest.approx(0.9)
        assert plan.policy.is_deterministic()

    def test_zero_budget_forces_free_arm(self):
        plan = solve_cmdp(make_bandit(d=[0.0]).cmdp)
        np.testing.assert_allclose(plan.y.y, [0.0, 1.0])
        assert plan.value == pytest.approx(0.7)

    def test_infeasible_is_a_status(self):
        cmdp = make_bandit(means_c=[[0.4, 0.5]], d=[0.3]).cmdp
        plan = solve_cmdp(cmdp)
        assert plan.status is LpStatus.INFEASIBLE
        assert not plan.feasible and plan.y is None and plan.policy is None

    @pytest.mark.parametrize("seed", range(25))
    def test_random_instances_match_vertex_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        cmdp = random_cmdp(rng, int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(0, 3)))
        status, value = _oracle_value(cmdp)
        plan = solve_cmdp(cmdp)
        assert plan.status.value == status
        if status == "optimal":
            assert plan.value == pytest.approx(value, abs=1e-7)
            plan.y.check(cmdp)
            assert np.all(cmdp.mean_costs @ plan.y.y <= cmdp.budgets + 1e-8)
            assert plan.value == pytest.approx(float(cmdp.mean_reward @ plan.y.y), abs=1e-12)

    @pytest.mark.parametrize("seed", range(15))
    def test_unconstrained_optimum_is_deterministic(self, seed):
        rng = np.random.default_rng(100 + seed)
        cmdp = random_cmdp(rng, 4, 3, 1)
        cmdp = cmdp.with_means(budgets=np.ones(1))
        plan = solve_cmdp(cmdp)
        support = plan.y.state_marginal() > 0
        assert plan.policy.is_deterministic(states=np.flatnonzero(support))

    def test_recovered_policy_reproduces_occupation(self):
        cmdp = random_cmdp(np.random.default_rng(9), 4, 2, 1)
        plan = solve_cmdp(cmdp)
        y = stationary_occupation(cmdp, plan.policy).y
        np.testing.assert_allclose(y, plan.y.y, atol=1e-8)


class TestThreeState:
    def test_unconstrained_optimum_always_navigates(self):
        cmdp = make_three_state(d=1.0).cmdp
        plan = solve_cmdp(cmdp)
        np.testing.assert_allclose(plan.policy.probs[:, NAVIGATE], 1.0)

    def test_constrained_optimum_matches_vertex_enumeration(self):
        cmdp = make_three_state().cmdp
        status, value = _oracle_value(cmdp)
        plan = solve_cmdp(cmdp)
        assert status == "optimal"
        assert plan.value == pytest.approx(value, abs=1e-9)
        # budget binds: navigation share 0.2 / 0.3 of the time
        assert plan.value == pytest.approx(2 / 3 * np.mean([0.5, 0.6, 0.7]), abs=1e-12)
        assert average_value(plan.y, cmdp.mean_costs[0]) == pytest.approx(0.2, abs=1e-9)
        assert not plan.policy.is_deterministic()

    def test_an_optimum_stays_with_positive_probability_everywhere(self):
        # staying is free, so the stay mass can be spread over all states
        # without changing reward or cost; the symmetric split is optimal
        cmdp = make_three_state().cmdp
        # navigate two thirds of the time in every state: cost 0.3 * 2/3 = 0.2
        pol = Policy(np.tile([1 / 3, 2 / 3], (3, 1)))
        y = stationary_occupation(cmdp, pol)
        assert np.all(pol.probs[:, STAY] > 0)
        assert average_value(y, cmdp.mean_costs[0]) == pytest.approx(0.2, abs=1e-12)
        assert average_value(y, cmdp.mean_reward) == pytest.approx(solve_cmdp(cmdp).value, abs=1e-12)


class TestSolveRobust:
    def test_exact_means_reduce_to_exact_planner(self):
        cmdp = random_cmdp(np.random.default_rng(4), 3, 2, 2, budget_scale=1.2)
        a = solve_cmdp(cmdp)
        b = solve_robust(cmdp.P, cmdp.A, cmdp.mean_reward, cmdp.mean_costs, cmdp.budgets)
        assert a.status == b.status
        np.testing.assert_array_equal(a.y.y, b.y.y)

    def test_all_ones_costs_are_infeasible(self):
        P = np.ones((2, 1))
        assert solve_robust(P, 2, [0.9, 0.7], [[1.0, 1.0]], [0.3]).status is LpStatus.INFEASIBLE

    def test_widened_bandit_costs(self):
        p, _ = bandit_single_constraint_optimum((0.9, 0.7), (0.5, 0.1), 0.3)
        plan = solve_robust(np.ones((2, 1)), 2, [0.9, 0.7], [[0.5, 0.1]], [0.3])
        np.testing.assert_allclose(plan.y.y, [p, 1 - p], atol=1e-9)
        np.testing.assert_allclose(plan.y.y, [0.5, 0.5], atol=1e-12)

    def test_empty_cost_block(self):
        plan = solve_robust(np.ones((2, 1)), 2, [0.2, 0.7], np.zeros((0, 2)), [])
        np.testing.assert_allclose(plan.y.y, [0.0, 1.0])


class TestRecoverPolicy:
    def test_single_state(self):
        np.testing.assert_allclose(recover_policy(OccupationMeasure([0.75, 0.25], 2)).probs, [[0.75, 0.25]])

    def test_zero_mass_state_is_uniform(self):
        pol = recover_policy(OccupationMeasure([0.5, 0.5, 0.0, 0.0], 2))
        np.testing.assert_allclose(pol.probs, [[0.5, 0.5], [0.5, 0.5]])

    def test_normalizes_each_state(self):
        pol = recover_policy(OccupationMeasure([0.2, 0.0, 0.6, 0.2], 2))
        np.testing.assert_allclose(pol.probs, [[1.0, 0.0], [0.75, 0.25]], atol=1e-15)

    def test_snaps_numerical_dust(self):
        pol = recover_policy(OccupationMeasure([0.5, 1e-14, 0.25, 0.25], 2))
        assert pol.probs[0, 1] == 0.0

    def test_rows_sum_to_one_exactly(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            y = rng.random(12) * (rng.random(12) > 0.3)
            if y.sum() == 0:
                continue
            pol = recover_policy(OccupationMeasure(y / y.sum(), 3))
            assert np.all(np.abs(pol.probs.sum(axis=1) - 1.0) <= 1e-15)
