# coding: utf-8

# # The regret oracle
#
# With costs ranging over the unit box, the worst cost for a cumulative
# occupancy gap puts 1 on every cell where the learner over-visits and 0
# elsewhere. So the regret is just the sum of positive parts. Here we check
# that against brute force over every corner of the box.

import numpy as np

from tabular_oal.evaluation import al_regret, al_regret_bruteforce

rng = np.random.default_rng(0)
gap = rng.normal(size=(2, 2, 3))
print(al_regret(gap), al_regret_bruteforce(gap))


# Replaying the expert gives exactly zero at every checkpoint.

from tabular_oal import ChainSpec, build_curve, occupancy, replay, stochastic_chain
from tabular_oal.oal import OalConfig

mdp, expert = stochastic_chain(ChainSpec())
log = replay(mdp, expert, OalConfig(K=1000, eval_every=250), reference=occupancy(mdp, expert))
print(build_curve(log, mdp, expert).regret)


# The built-in self-test runs these cross-checks on a few hundred random instances.

from tabular_oal.selftest import run_selftest

run_selftest()
