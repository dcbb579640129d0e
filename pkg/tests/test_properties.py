"""Property-based checks of the structural invariants.

The acceptance suite calls these same functions, so keep them cheap.
"""

import tempfile

import numpy as np
from hypothesis import given, settings, strategies as st

from cucrl.agents import CucrlConfig, run_cucrl, run_rs_ucrl2
from cucrl.cmdp import induced_chain, stationary_occupation
from cucrl.environments import make_bandit, make_three_state
from cucrl.harness import io
from cucrl.harness.metrics import compute_metrics
from cucrl.planner import recover_policy, solve_cmdp
from generators import cmdp_and_policy, cmdps


@settings(max_examples=60)
@given(cmdp_and_policy())
def test_stationary_occupation_conserves_flow(case):
    cmdp, pol = case
    y = stationary_occupation(cmdp, pol)
    assert y.flow_residual(cmdp) <= 1e-8
    assert abs(y.y.sum() - 1.0) <= 1e-8 and np.all(y.y >= 0)


@settings(max_examples=60)
@given(cmdps())
def test_planned_occupation_conserves_flow(cmdp):
    plan = solve_cmdp(cmdp)
    if plan.feasible:
        assert plan.y.flow_residual(cmdp) <= 1e-8
        assert np.all(cmdp.mean_costs @ plan.y.y <= cmdp.budgets + 1e-8)


@settings(max_examples=60)
@given(cmdp_and_policy())
def test_policy_round_trip(case):
    cmdp, pol = case
    y = stationary_occupation(cmdp, pol)
    back = recover_policy(y)
    visited = y.state_marginal() > 0
    np.testing.assert_allclose(back.probs[visited], pol.probs[visited], atol=1e-8)


@settings(max_examples=60)
@given(cmdp_and_policy())
def test_stationary_fixed_point(case):
    cmdp, pol = case
    mu = stationary_occupation(cmdp, pol).state_marginal()
    assert np.abs(mu @ induced_chain(cmdp, pol) - mu).max() <= 1e-10


@settings(max_examples=8)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["cucrl", "rs_ucrl2"]))
def test_identical_seeds_give_identical_logs(seed, agent):
    cfg = CucrlConfig(h=20, K=4, seed=seed)
    run = run_cucrl if agent == "cucrl" else (lambda env, c: run_rs_ucrl2(env, c, [2.0]))
    a, b = run(make_three_state(), cfg), run(make_three_state(), cfg)
    assert a.steps == b.steps
    assert a.episodes == b.episodes


@settings(max_examples=8)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["three_state", "bandit"]))
def test_csv_round_trip(seed, kind):
    env = make_three_state() if kind == "three_state" else make_bandit()
    log = run_cucrl(env, CucrlConfig(h=20 if kind == "three_state" else 50, K=3, seed=seed))
    metrics = compute_metrics(log, env.cmdp)
    with tempfile.TemporaryDirectory() as tmp:
        io.write_run(log, env.cmdp, tmp)
        assert io.metrics_from_csv(tmp) == metrics
        steps = io.read_steps(f"{tmp}/steps.csv")
    np.testing.assert_array_equal(steps["costs"], log.steps.costs)
    np.testing.assert_array_equal(steps["reward"], log.steps.reward)
    np.testing.assert_array_equal(steps["state"], log.steps.state)
