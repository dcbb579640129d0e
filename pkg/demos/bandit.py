# %% [markdown]
# # Budgeted two-armed bandit
#
# Arm 0 pays more but costs 0.4 per pull; arm 1 is free. With a budget of
# 0.3 the best stationary policy pulls arm 0 three quarters of the time.
# We plan on the true model, then let the learner find it from samples.

# %%
import numpy as np

from cucrl import CucrlConfig, run_cucrl, solve_cmdp
from cucrl.environments import make_bandit
from cucrl.harness.metrics import compute_metrics, regret_slope
from cucrl.harness.plotting import line_chart, save_chart

env = make_bandit()
plan = solve_cmdp(env.cmdp)
print("optimal y:", plan.y.y, "gain:", plan.value, "cost:", env.cmdp.mean_costs @ plan.y.y)

# %%
log = run_cucrl(env, CucrlConfig(delta=0.1, h=50, K=40, seed=0))
metrics = compute_metrics(log, env.cmdp)
arm0 = np.array([e.policy.probs[0, 0] for e in log.episodes])
print(f"T={log.T}  total pseudo-regret={metrics.total_regret:.1f}")
print("arm-0 probability, every 5th episode:", np.round(arm0[::5], 3))
print("trailing regret slope:", regret_slope(metrics.cumulative_regret).slope)

# %% the learner approaches 0.75 from below, never overspending
t = np.arange(1, log.T + 1)
svg = line_chart(
    {"average cost": (t, metrics.average_cost[:, 0])},
    title="Bandit: running average cost",
    xlabel="t",
    ylabel="cost",
    hlines={"budget": float(env.budgets[0])},
)
save_chart("bandit_cost.svg", svg)
