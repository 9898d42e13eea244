"""Finite-horizon tabular MDPs and exact dynamic programming.

Array conventions (0-based internally, step ``h`` in docs is ``h + 1``):

* dynamics ``p``: ``(H, S, A, S)``, ``p[h, s, a, s']``
* initial distribution ``mu``: ``(S,)``
* policy, cost, occupancy: ``(H, S, A)``
* values ``V``: ``(H + 1, S)`` with ``V[H] == 0``; ``Q``: ``(H, S, A)``

The DP kernels accept extra leading batch axes on every argument and
broadcast them, which is how many independent learners are advanced at once.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

PROB_TOL = 1e-12


class ShapeError(ValueError):
    """Array shapes are inconsistent with each other."""


class DistributionError(ValueError):
    """A probability vector is negative or does not sum to one."""


def normalize_rows(x, name: str = "distribution", tol: float = PROB_TOL) -> np.ndarray:
    """Validate that the last axis holds distributions, then renormalize exactly."""
    x = np.array(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DistributionError(f"{name}: non-finite entries")
    neg = np.argwhere(x < 0)
    if len(neg):
        raise DistributionError(f"{name}: negative entry at index {tuple(int(i) for i in neg[0])}")
    totals = x.sum(axis=-1)
    bad = np.argwhere(np.abs(totals - 1.0) > tol)
    if len(bad):
        loc = tuple(int(i) for i in bad[0])
        raise DistributionError(
            f"{name}: row {loc} sums to {float(totals[loc]):.15g}, expected 1 within {tol:g}"
        )
    return x / totals[..., None]


@dataclass(frozen=True, eq=False)
class TabularMdp:
    """Non-stationary finite-horizon MDP without a cost (costs are chosen by the adversary)."""

    initial_dist: np.ndarray
    dynamics: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.initial_dist)
        p = np.asarray(self.dynamics)
        if mu.ndim != 1 or p.ndim != 4:
            raise ShapeError("initial_dist must be (S,) and dynamics (H, S, A, S)")
        H, S, A, S2 = p.shape
        if H < 1 or S < 1 or A < 1:
            raise ShapeError("horizon, num_states and num_actions must be >= 1")
        if S2 != S or mu.shape[0] != S:
            raise ShapeError(f"state dimension mismatch: dynamics {p.shape}, initial_dist {mu.shape}")
        mu = normalize_rows(mu, "initial_dist")
        p = normalize_rows(p, "dynamics")
        mu.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "initial_dist", mu)
        object.__setattr__(self, "dynamics", p)

    @property
    def horizon(self) -> int:
        return self.dynamics.shape[0]

    @property
    def num_states(self) -> int:
        return self.dynamics.shape[1]

    @property
    def num_actions(self) -> int:
        return self.dynamics.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        """``(H, S, A)``, the shape of policies, costs and occupancies."""
        return self.dynamics.shape[:3]

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "num_states": self.num_states,
            "num_actions": self.num_actions,
            "initial_dist": self.initial_dist.tolist(),
            "dynamics": self.dynamics.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TabularMdp":
        mdp = cls(np.asarray(obj["initial_dist"], float), np.asarray(obj["dynamics"], float))
        declared = (obj["horizon"], obj["num_states"], obj["num_actions"])
        if tuple(declared) != mdp.shape:
            raise ShapeError(f"declared (H, S, A) = {declared} but arrays have {mdp.shape}")
        return mdp


class ValueTables(NamedTuple):
    V: np.ndarray  # (..., H + 1, S)
    Q: np.ndarray  # (..., H, S, A)


def validate_policy(probs, shape: tuple[int, int, int] | None = None) -> np.ndarray:
    """Check a ``(H, S, A)`` policy table and return a renormalized float copy."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim < 3:
        raise ShapeError(f"policy must be (H, S, A), got {probs.shape}")
    if shape is not None and probs.shape[-3:] != tuple(shape):
        raise ShapeError(f"policy shape {probs.shape[-3:]} does not match MDP {tuple(shape)}")
    return normalize_rows(probs, "policy")


def validate_cost(cost, shape: tuple[int, int, int] | None = None) -> np.ndarray:
    """Check that a cost table lies in the unit box."""
    cost = np.asarray(cost, dtype=np.float64)
    if shape is not None and cost.shape[-3:] != tuple(shape):
        raise ShapeError(f"cost shape {cost.shape[-3:]} does not match MDP {tuple(shape)}")
    if not np.all((cost >= 0.0) & (cost <= 1.0)):
        raise ValueError("cost entries must lie in [0, 1]")
    return cost


def uniform_policy(H: int, S: int, A: int) -> np.ndarray:
    return np.full((H, S, A), 1.0 / A)


def deterministic_policy(actions, num_actions: int | None = None) -> np.ndarray:
    """One-hot policy from an integer ``(H, S)`` action table."""
    actions = np.asarray(actions)
    A = int(actions.max()) + 1 if num_actions is None else num_actions
    if actions.min() < 0 or actions.max() >= A:
        raise ValueError("action index out of range")
    return np.eye(A)[actions]


def _check_dims(p, *tables):
    H, S, A = p.shape[-4:-1]
    for t in tables:
        if t.shape[-3:] != (H, S, A):
            raise ShapeError(f"expected trailing shape {(H, S, A)}, got {t.shape}")


def forward_occupancy(p: np.ndarray, mu: np.ndarray, policy: np.ndarray) -> np.ndarray:
    """Occupancy recursion on raw arrays; leading batch axes broadcast."""
    p, mu, policy = np.asarray(p), np.asarray(mu), np.asarray(policy)
    _check_dims(p, policy)
    H = policy.shape[-3]
    batch = np.broadcast_shapes(p.shape[:-4], mu.shape[:-1], policy.shape[:-3])
    d = np.empty(batch + policy.shape[-3:])
    state = mu
    for h in range(H):
        d[..., h, :, :] = state[..., :, None] * policy[..., h, :, :]
        if h + 1 < H:
            state = (d[..., h, :, :, None] * p[..., h, :, :, :]).sum(axis=(-3, -2))
    return d


def occupancy(mdp: TabularMdp, policy) -> np.ndarray:
    """State-action visitation probabilities ``d[h, s, a]`` of ``policy`` in ``mdp``."""
    return forward_occupancy(mdp.dynamics, mdp.initial_dist, np.asarray(policy, float))


def backward_values(p: np.ndarray, cost: np.ndarray, policy: np.ndarray) -> ValueTables:
    """Exact policy evaluation on raw arrays; leading batch axes broadcast."""
    p, cost, policy = np.asarray(p), np.asarray(cost), np.asarray(policy)
    _check_dims(p, cost, policy)
    H, S, A = policy.shape[-3:]
    batch = np.broadcast_shapes(p.shape[:-4], cost.shape[:-3], policy.shape[:-3])
    V = np.zeros(batch + (H + 1, S))
    Q = np.empty(batch + (H, S, A))
    for h in range(H - 1, -1, -1):
        Q[..., h, :, :] = cost[..., h, :, :] + (p[..., h, :, :, :] * V[..., None, None, h + 1, :]).sum(-1)
        V[..., h, :] = (Q[..., h, :, :] * policy[..., h, :, :]).sum(-1)
    return ValueTables(V, Q)


def evaluate(mdp: TabularMdp, cost, policy) -> ValueTables:
    """Expected cost-to-go ``V`` and ``Q`` of ``policy`` under ``cost``."""
    return backward_values(mdp.dynamics, np.asarray(cost, float), np.asarray(policy, float))


def inner_product(cost, occ) -> float:
    cost, occ = np.asarray(cost), np.asarray(occ)
    if cost.shape != occ.shape:
        raise ShapeError(f"cost {cost.shape} and occupancy {occ.shape} differ")
    return float(np.sum(cost * occ))


def sample_index(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF sampling along the last axis; never returns a zero-probability index."""
    cdf = np.cumsum(probs, axis=-1)[..., :-1]
    return (np.asarray(u)[..., None] >= cdf).sum(axis=-1)


def rollout(p, mu, policy, u: np.ndarray) -> np.ndarray:
    """Roll out episodes driven by pre-drawn uniforms.

    ``u`` has shape ``(..., 2H)``: ``u[0]`` draws the start state, ``u[2h+1]``
    the action at step ``h`` and ``u[2h+2]`` the next state. Returns integer
    ``(..., H, 2)`` trajectories of ``(s_h, a_h)``.
    """
    p, policy = np.asarray(p), np.asarray(policy)
    H = policy.shape[-3]
    batch = u.shape[:-1]
    out = np.empty(batch + (H, 2), dtype=np.int64)
    s = sample_index(np.broadcast_to(mu, batch + mu.shape[-1:]), u[..., 0])
    pol = np.broadcast_to(policy, batch + policy.shape[-3:])
    dyn = np.broadcast_to(p, batch + p.shape[-4:])
    idx = np.indices(batch)
    for h in range(H):
        a = sample_index(pol[(*idx, h, s)], u[..., 2 * h + 1])
        out[..., h, 0] = s
        out[..., h, 1] = a
        if h + 1 < H:
            s = sample_index(dyn[(*idx, h, s, a)], u[..., 2 * h + 2])
    return out


def sample_trajectory(mdp: TabularMdp, policy, rng: np.random.Generator) -> np.ndarray:
    """One episode as an ``(H, 2)`` array of ``(state, action)`` pairs."""
    u = rng.random(2 * mdp.horizon)
    return rollout(mdp.dynamics, mdp.initial_dist, np.asarray(policy, float), u)


def value_difference_residual(mdp1: TabularMdp, cost1, mdp2: TabularMdp, cost2, policy1, policy2) -> float:
    """Numerical residual of the value-difference identity.

    Compares ``E_mu[V1^{pi1, M1} - V1^{pi2, M2}]`` with the sum, under the
    occupancy of ``(pi2, M2)``, of the policy-mismatch term
    ``<Q^{pi1,M1}(s,.), pi1 - pi2>`` plus the model-mismatch term
    ``(c1 - c2) + (p1 - p2) V^{pi1,M1}_{h+1}``.
    """
    if mdp1.shape != mdp2.shape:
        raise ShapeError("MDPs must share (H, S, A)")
    if not np.allclose(mdp1.initial_dist, mdp2.initial_dist, rtol=0, atol=PROB_TOL):
        raise ValueError("both MDPs must share the initial distribution")
    cost1, cost2 = np.asarray(cost1, float), np.asarray(cost2, float)
    pi1, pi2 = np.asarray(policy1, float), np.asarray(policy2, float)
    V1, Q1 = evaluate(mdp1, cost1, pi1)
    V2, _ = evaluate(mdp2, cost2, pi2)
    mu = mdp1.initial_dist
    lhs = mu @ (V1[0] - V2[0])

    d2 = occupancy(mdp2, pi2)
    state_occ = d2.sum(-1)
    policy_term = np.sum(state_occ * np.sum(Q1 * (pi1 - pi2), axis=-1))
    next_v = np.einsum("hsat,ht->hsa", mdp1.dynamics - mdp2.dynamics, V1[1:])
    model_term = np.sum(d2 * ((cost1 - cost2) + next_v))
    return float(abs(lhs - (policy_term + model_term)))


def save_mdp(mdp: TabularMdp, path, expert=None) -> None:
    obj = mdp.to_dict()
    if expert is not None:
        obj["expert"] = np.asarray(expert).tolist()
    Path(path).write_text(json.dumps(obj))


def load_mdp(path) -> tuple[TabularMdp, np.ndarray | None]:
    """Read the MDP JSON format; an ``expert`` field, when present, is returned too."""
    obj = json.loads(Path(path).read_text())
    mdp = TabularMdp.from_dict(obj)
    expert = obj.get("expert")
    if expert is not None:
        expert = validate_policy(expert, mdp.shape)
    return mdp, expert


def save_policy(policy, path) -> None:
    policy = np.asarray(policy)
    H, S, A = policy.shape
    obj = {"horizon": H, "num_states": S, "num_actions": A, "probs": policy.tolist()}
    Path(path).write_text(json.dumps(obj))


def load_policy(path, shape: tuple[int, int, int] | None = None) -> np.ndarray:
    obj = json.loads(Path(path).read_text())
    probs = obj["probs"] if isinstance(obj, dict) else obj
    return validate_policy(probs, shape)
