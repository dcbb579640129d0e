# %% [markdown]
# # Grid navigation with a costly shortcut
#
# The destination is two cells north of the origin, but the cell in between
# has cost 0.9. The free detour around it is longer. The budget decides how
# often the shortcut may be used.

# %%
import numpy as np

from cucrl import CucrlConfig, run_cucrl, solve_cmdp
from cucrl.environments import TWO_ROUTE_MAP, gridworld_from_ascii
from cucrl.harness.metrics import compute_metrics

print(TWO_ROUTE_MAP)
for d in (0.0, 0.05, 0.1, 0.3):
    cmdp = gridworld_from_ascii(TWO_ROUTE_MAP, slip=0.1, d=d).cmdp
    plan = solve_cmdp(cmdp)
    if not plan.feasible:
        # slipping into the costly cell cannot be avoided entirely
        print(f"budget {d:4.2f}: infeasible")
        continue
    print(f"budget {d:4.2f}: optimal gain {plan.value:.4f}, cost {float(cmdp.mean_costs[0] @ plan.y.y):.4f}")

# %% [markdown]
# A short learning run. The uniform baseline already spends about 0.096, so
# we give the learner a budget of 0.3; with 0.1 the slack would be too thin
# for the pessimistic plan to become feasible in reasonable time.

# %%
env = gridworld_from_ascii(TWO_ROUTE_MAP, slip=0.1, d=0.3, seed=0)
log = run_cucrl(env, CucrlConfig(delta=0.1, h=200, K=8, seed=0))
metrics = compute_metrics(log, env.cmdp)
for e in metrics.per_episode:
    print(f"episode {e.k}: plan feasible={e.rlp_feasible} true cost={np.round(e.true_costs, 3)}")
