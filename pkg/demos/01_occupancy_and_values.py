# coding: utf-8

# # Occupancy measures and values on the chain
#
# A policy on a finite-horizon MDP induces a distribution over (state, action)
# pairs at every step. Paired with a cost table it gives the expected total cost,
# and the same number falls out of the backward value recursion.

import numpy as np

from tabular_oal import ChainSpec, evaluate, inner_product, occupancy, stochastic_chain
from tabular_oal.mdp_core import uniform_policy

mdp, expert = stochastic_chain(ChainSpec(horizon=8, alpha=0.3))
mdp.shape


# The expert always plays a0. Each step it survives in s0 with probability 0.7:

d_expert = occupancy(mdp, expert)
print(np.round(d_expert[:, 0, 0], 4))
print(np.round(0.7 ** np.arange(8), 4))


# A uniform policy leaks into the absorbing state much faster.

d_uniform = occupancy(mdp, uniform_policy(8, 2, 2))
print(np.round(d_uniform[:, 0].sum(-1), 4))


# Cost of one for being in s1, zero otherwise. Forward and backward views agree.

cost = np.zeros((8, 2, 2))
cost[:, 1, :] = 1.0
V, Q = evaluate(mdp, cost, uniform_policy(8, 2, 2))
print(inner_product(cost, d_uniform), mdp.initial_dist @ V[0])
