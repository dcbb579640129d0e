# %% [markdown]
# # Three-state cycle: constrained learner versus fixed scalarization
#
# Staying is free and pays nothing; navigating pays 0.5 to 0.7 but costs
# 0.3 against a budget of 0.2. The constrained optimum mixes the two
# actions. A scalarized learner with penalty weight lambda sees either
# "always navigate" (lambda below 2) or "stay forever" (lambda above 2).

# %%
import numpy as np

from cucrl import CucrlConfig, run_cucrl, run_rs_ucrl2, solve_cmdp
from cucrl.environments import make_three_state
from cucrl.harness.metrics import compute_metrics, violation_probability

env = make_three_state()
plan = solve_cmdp(env.cmdp)
print("constrained optimum policy (stay, navigate):\n", np.round(plan.policy.probs, 3))
print("gain:", round(plan.value, 4), "cost:", np.round(env.cmdp.mean_costs @ plan.y.y, 4))

# %%
cfg = dict(delta=0.1, h=60, K=30)
seeds = range(5)
runs = {"cucrl": [run_cucrl(make_three_state(), CucrlConfig(seed=s, **cfg)) for s in seeds]}
for lam in (1.9, 2.1):
    runs[f"rs_ucrl2 lambda={lam}"] = [
        run_rs_ucrl2(make_three_state(), CucrlConfig(seed=s, **cfg), [lam]) for s in seeds
    ]

# %%
for name, logs in runs.items():
    viol = violation_probability(logs, env.cmdp)[0]
    regret = np.mean([compute_metrics(log, env.cmdp).total_regret for log in logs])
    final = logs[0].episodes[-1].policy.probs
    print(f"{name:22s} violation={viol:.3f} mean regret={regret:8.1f} final policy={np.round(final, 2).tolist()}")
