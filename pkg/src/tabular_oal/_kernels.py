"""Compiled episode loop for a single learner.

Mirrors ``oal._step`` operation for operation (same sampling rule, same
update order); ``tests/test_oal.py`` checks the two paths agree.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _sample(row, u):
    # number of interior CDF boundaries <= u, matching mdp_core.sample_index
    acc = 0.0
    idx = 0
    for i in range(row.shape[0] - 1):
        acc += row[i]
        if u >= acc:
            idx += 1
    return idx


@njit(cache=True)
def _forward(p, mu, policy, out):
    H, S, A = policy.shape
    state = mu.copy()
    for h in range(H):
        for s in range(S):
            for a in range(A):
                out[h, s, a] = state[s] * policy[h, s, a]
        if h + 1 < H:
            state[:] = 0.0
            for s in range(S):
                for a in range(A):
                    w = out[h, s, a]
                    if w != 0.0:
                        for t in range(S):
                            state[t] += w * p[h, s, a, t]


@njit(cache=True)
def run_learner(p, mu, ref, dhat_e, policy, cost, n, m, u, t_pi, t_c, bonus_coef,
                checkpoints, gap_out, occ_out):
    """Advance one learner ``u.shape[0]`` episodes in place.

    ``checkpoints`` lists episode indices (1-based, increasing) at which the
    cumulative gap and acting-policy occupancy are written to row ``i + 1`` of
    ``gap_out`` / ``occ_out``.
    """
    H, S, A = policy.shape
    K = u.shape[0]
    gap = np.zeros((H, S, A))
    occ = np.empty((H, S, A))
    dhat = np.empty((H, S, A))
    pbar = np.empty((H, S, A, S))
    Q = np.empty((H, S, A))
    V = np.zeros((H + 1, S))
    states = np.empty(H, np.int64)
    actions = np.empty(H, np.int64)
    ci = 0
    for k in range(K):
        _forward(p, mu, policy, occ)
        for h in range(H):
            for s in range(S):
                for a in range(A):
                    gap[h, s, a] += occ[h, s, a] - ref[h, s, a]

        s = _sample(mu, u[k, 0])
        for h in range(H):
            a = _sample(policy[h, s], u[k, 2 * h + 1])
            states[h] = s
            actions[h] = a
            if h + 1 < H:
                s = _sample(p[h, s, a], u[k, 2 * h + 2])

        for h in range(H):
            for s in range(S):
                for a in range(A):
                    tot = 0.0
                    for t in range(S):
                        tot += m[h, s, a, t]
                    for t in range(S):
                        pbar[h, s, a, t] = m[h, s, a, t] / tot if tot > 0 else 1.0 / S
        _forward(pbar, mu, policy, dhat)

        for h in range(H - 1, -1, -1):
            for s in range(S):
                v = 0.0
                for a in range(A):
                    b = 0.0
                    if bonus_coef > 0.0:
                        b = bonus_coef / np.sqrt(max(n[h, s, a], 1))
                    q = cost[h, s, a] - b
                    for t in range(S):
                        q += pbar[h, s, a, t] * V[h + 1, t]
                    q = max(q, 0.0)
                    Q[h, s, a] = q
                    v += q * policy[h, s, a]
                V[h, s] = v

        for h in range(H):
            for s in range(S):
                zmin = t_pi * Q[h, s, 0]
                for a in range(1, A):
                    zmin = min(zmin, t_pi * Q[h, s, a])
                tot = 0.0
                for a in range(A):
                    w = policy[h, s, a] * np.exp(-(t_pi * Q[h, s, a] - zmin))
                    policy[h, s, a] = w
                    tot += w
                for a in range(A):
                    policy[h, s, a] /= tot
                    c = cost[h, s, a] + t_c * (dhat[h, s, a] - dhat_e[h, s, a])
                    cost[h, s, a] = min(max(c, 0.0), 1.0)

        for h in range(H):
            n[h, states[h], actions[h]] += 1
            if h + 1 < H:
                m[h, states[h], actions[h], states[h + 1]] += 1

        if ci < checkpoints.shape[0] and k + 1 == checkpoints[ci]:
            gap_out[ci + 1] = gap
            occ_out[ci + 1] = occ
            ci += 1
