# coding: utf-8

# # Behavioral cloning, then online learning
#
# Fifty start states, all of which should move to one target state. With a
# handful of demonstrations, cloning sees few starts and acts uniformly at the
# rest. Starting the online learner from the cloned policy keeps what was seen
# and learns the remaining starts from interaction.

import numpy as np

from tabular_oal import bc_policy, collect_expert_data, fifty_start_mdp, occupancy
from tabular_oal.evaluation import al_regret

mdp, expert = fifty_start_mdp()
data = collect_expert_data(mdp, expert, 1, np.random.default_rng(3))
pi = bc_policy(data, 50, 2)
print("observed start:", data[0, 0, 0], "cloned action probs there:", pi[0, data[0, 0, 0]])


# Per-episode regret of the frozen cloned policy, straight from the occupancy gap.

gap = occupancy(mdp, pi) - occupancy(mdp, expert)
print("per-episode regret:", al_regret(gap))


# Now the comparison across N.

from tabular_oal import harness
from tabular_oal.oal import OalConfig

spec = harness.ExperimentSpec(environment="fifty", config=OalConfig(K=1000, bonus_scale=0.005, eval_every=100),
                              N_values=(1, 10, 50, 5000), seeds=10, jobs=1)
final = harness.final_rows(harness.run_bc_comparison(spec))
for N in spec.N_values:
    print(N, round(final[("bc-only", N, None)].mean_regret, 1), round(final[("oal-bc-init", N, None)].mean_regret, 1))
