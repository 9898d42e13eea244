"""Independent reference computations used by the tests.

Nothing here calls into the DP kernels of the package; each function works
from first principles (enumeration, direct loops) so that agreement is evidence.
"""
import itertools

import numpy as np

from tabular_oal.mdp_core import TabularMdp


def random_mdp(rng, H, S, A, sparse=False):
    p = rng.random((H, S, A, S)) + 1e-3
    if sparse:
        p *= rng.random((H, S, A, S)) < 0.6
        p[..., 0] += 1e-3
    p /= p.sum(-1, keepdims=True)
    mu = rng.random(S) + 1e-3
    return TabularMdp(mu / mu.sum(), p)


def random_policy(rng, H, S, A):
    pi = rng.random((H, S, A)) + 1e-3
    return pi / pi.sum(-1, keepdims=True)


def enumerate_occupancy(mdp, policy):
    """Occupancy by summing the probability of every (s_1, a_1, ..., s_H, a_H) path."""
    H, S, A = mdp.shape
    p, mu = mdp.dynamics, mdp.initial_dist
    d = np.zeros((H, S, A))
    for path in itertools.product(range(S * A), repeat=H):
        prob = 1.0
        prev = None
        for h, sa in enumerate(path):
            s, a = divmod(sa, A)
            prob *= mu[s] if h == 0 else p[h - 1, prev[0], prev[1], s]
            prob *= policy[h, s, a]
            if prob == 0.0:
                break
            prev = (s, a)
        else:
            for h, sa in enumerate(path):
                s, a = divmod(sa, A)
                d[h, s, a] += prob
    return d


def loop_optimistic_q(p_bar, cost, bonus, policy):
    """Line-by-line scalar transcription of the optimistic evaluation loop."""
    H, S, A = policy.shape
    V = [[0.0] * S for _ in range(H + 1)]
    Q = np.zeros((H, S, A))
    for h in reversed(range(H)):
        for s in range(S):
            for a in range(A):
                nxt = sum(p_bar[h, s, a, t] * V[h + 1][t] for t in range(S))
                q = cost[h, s, a] - bonus[h, s, a] + nxt
                Q[h, s, a] = max(q, 0.0)
            V[h][s] = sum(Q[h, s, a] * policy[h, s, a] for a in range(A))
    return np.array(V), Q


def loop_occupancy(p, mu, policy):
    """Scalar forward recursion (used where enumeration is too large)."""
    H, S, A = policy.shape
    d = np.zeros((H, S, A))
    for s in range(S):
        for a in range(A):
            d[0, s, a] = mu[s] * policy[0, s, a]
    for h in range(1, H):
        for t in range(S):
            mass = sum(d[h - 1, s, a] * p[h - 1, s, a, t] for s in range(S) for a in range(A))
            for a in range(A):
                d[h, t, a] = mass * policy[h, t, a]
    return d


def enumerate_occupancy_vectorized(mdp, policy):
    """Same path enumeration as ``enumerate_occupancy``, with all paths held in one array."""
    H, S, A = mdp.shape
    p, mu = mdp.dynamics, mdp.initial_dist
    paths = np.indices((S * A,) * H).reshape(H, -1).T  # (n_paths, H), row-major over steps
    s, a = paths // A, paths % A
    prob = mu[s[:, 0]] * policy[0, s[:, 0], a[:, 0]]
    for h in range(1, H):
        prob = prob * p[h - 1, s[:, h - 1], a[:, h - 1], s[:, h]] * policy[h, s[:, h], a[:, h]]
    d = np.zeros((H, S, A))
    for h in range(H):
        np.add.at(d[h], (s[:, h], a[:, h]), prob)
    return d
