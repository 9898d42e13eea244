"""Online apprenticeship learning with optimistic exploration.

The learner plays a two-player game against a cost adversary. Each episode it
acts with its current policy, evaluates that policy optimistically on the
empirical model (cost minus a UCB bonus, clipped below at zero), takes an
exponentiated mirror-descent step on the policy and a projected gradient step
on the cost in the unit box.

Every state-carrying array may have leading batch axes; a batch of ``B``
learners is advanced in lockstep by :func:`run_batch`, each with its own
random stream, so a learner's trajectory does not depend on who else is in
the batch.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, asdict, field, replace

import numpy as np

from . import model as _model
from .expert import bc_policy, empirical_occupancy
from .mdp_core import TabularMdp, ValueTables, ShapeError, forward_occupancy, rollout, uniform_policy


@dataclass(frozen=True)
class OalConfig:
    K: int = 10_000
    t_pi: float | None = None  # None -> sqrt(2 ln A / (H^2 K))
    t_c: float | None = None  # None -> sqrt(S A / (2 K))
    delta: float = 0.1
    bonus_scale: float = 1.0
    initial_cost: float = 0.5
    bc_init: bool = False
    expert_model_init: bool = False
    eval_every: int = 10

    def __post_init__(self):
        if self.K < 0:
            raise ValueError("K must be >= 0")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.bonus_scale < 0:
            raise ValueError("bonus_scale must be >= 0")
        if not 0.0 <= self.initial_cost <= 1.0:
            raise ValueError("initial_cost must lie in [0, 1]")
        if self.eval_every < 1:
            raise ValueError("eval_every must be >= 1")
        for name in ("t_pi", "t_c"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def delta_prime(self) -> float:
        return self.delta / 3.0

    def policy_step(self, H: int, A: int) -> float:
        if self.t_pi is not None:
            return self.t_pi
        # a single action makes the policy step irrelevant; keep it positive
        return math.sqrt(2.0 * math.log(max(A, 2)) / (H * H * max(self.K, 1)))

    def cost_step(self, S: int, A: int) -> float:
        if self.t_c is not None:
            return self.t_c
        return math.sqrt(S * A / (2.0 * max(self.K, 1)))

    def to_dict(self) -> dict:
        return asdict(self)


class UniformStream:
    """Per-learner uniform draws, ``width`` numbers per episode, buffered in chunks.

    Drawing in chunks consumes each generator exactly as one call per episode
    would, so batched and single runs see the same numbers.
    """

    def __init__(self, rngs, width: int, chunk: int = 512):
        self.batched = isinstance(rngs, (list, tuple))
        self.rngs = list(rngs) if self.batched else [rngs]
        self.width = width
        self.chunk = chunk
        self._buf = None
        self._pos = chunk

    def next(self) -> np.ndarray:
        if self._pos >= self.chunk:
            self._buf = np.stack([g.random((self.chunk, self.width)) for g in self.rngs], axis=1)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u if self.batched else u[0]


@dataclass
class OalState:
    policy: np.ndarray
    cost: np.ndarray
    counters: _model.VisitCounters
    k: int
    rng: UniformStream

    def copy(self) -> "OalState":
        return replace(self, policy=self.policy.copy(), cost=self.cost.copy(),
                       counters=self.counters.copy(), rng=copy.deepcopy(self.rng))


@dataclass
class RunLog:
    """Checkpointed record of a run.

    ``cum_gap[i]`` is the sum over episodes ``1..episodes[i]`` of the true
    occupancy of the acting policy minus ``reference`` (zeros unless an
    evaluation reference was supplied). ``occupancy[i]`` is the true occupancy
    of the policy that acted in episode ``episodes[i]``.
    """

    config: OalConfig
    episodes: list[int]
    reference: np.ndarray
    cum_gap: np.ndarray  # (n_checkpoints, *batch, H, S, A)
    occupancy: np.ndarray  # (n_checkpoints, *batch, H, S, A)
    policy: np.ndarray
    cost: np.ndarray
    regret: np.ndarray | None = field(default=None)

    def to_dict(self, seed_index: int | None = None) -> dict:
        """JSON-ready summary; for a batched log pick one learner with ``seed_index``."""
        pol, cost, reg = self.policy, self.cost, self.regret
        if seed_index is not None:
            pol, cost = pol[seed_index], cost[seed_index]
            reg = None if reg is None else reg[..., seed_index]
        checkpoints = [
            {"episode": int(k), "regret": None if reg is None else float(reg[i])}
            for i, k in enumerate(self.episodes)
        ]
        return {"config": self.config.to_dict(), "checkpoints": checkpoints,
                "policy": pol.tolist(), "cost": cost.tolist()}


def optimistic_evaluate(p_bar, cost, bonus, policy) -> ValueTables:
    """Backward recursion with ``Q = max(c - b + p_bar V', 0)``; no upper clip."""
    p_bar, cost, bonus, policy = (np.asarray(x, float) for x in (p_bar, cost, bonus, policy))
    H, S, A = policy.shape[-3:]
    for t in (cost, bonus):
        if t.shape[-3:] != (H, S, A):
            raise ShapeError(f"expected trailing shape {(H, S, A)}, got {t.shape}")
    if p_bar.shape[-4:] != (H, S, A, S):
        raise ShapeError(f"expected model shape {(H, S, A, S)}, got {p_bar.shape}")
    batch = np.broadcast_shapes(p_bar.shape[:-4], cost.shape[:-3], bonus.shape[:-3], policy.shape[:-3])
    V = np.zeros(batch + (H + 1, S))
    Q = np.empty(batch + (H, S, A))
    shifted = cost - bonus
    for h in range(H - 1, -1, -1):
        q = shifted[..., h, :, :] + (p_bar[..., h, :, :, :] * V[..., None, None, h + 1, :]).sum(-1)
        Q[..., h, :, :] = np.maximum(q, 0.0)
        V[..., h, :] = (Q[..., h, :, :] * policy[..., h, :, :]).sum(-1)
    return ValueTables(V, Q)


def policy_update(policy, Q, t_pi: float) -> np.ndarray:
    """Exponentiated-gradient step ``pi' ∝ pi * exp(-t_pi Q)`` per ``(h, s)`` row."""
    if not t_pi > 0:
        raise ValueError("t_pi must be > 0")
    Q = Q.Q if isinstance(Q, ValueTables) else np.asarray(Q, float)
    if not np.all(np.isfinite(Q)):
        raise ValueError("Q contains non-finite values")
    z = t_pi * Q
    w = np.asarray(policy, float) * np.exp(-(z - z.min(axis=-1, keepdims=True)))
    return w / w.sum(axis=-1, keepdims=True)


def cost_update(cost, d_hat_k, d_hat_e, t_c: float) -> np.ndarray:
    """Projected gradient ascent step of the cost player in the unit box."""
    if not t_c > 0:
        raise ValueError("t_c must be > 0")
    cost, d_hat_k, d_hat_e = (np.asarray(x, float) for x in (cost, d_hat_k, d_hat_e))
    if cost.shape[-3:] != d_hat_k.shape[-3:] or cost.shape[-3:] != d_hat_e.shape[-3:]:
        raise ShapeError("cost and occupancies must share (H, S, A)")
    return np.clip(cost + t_c * (d_hat_k - d_hat_e), 0.0, 1.0)


def model_occupancy(p_bar, policy, mu) -> np.ndarray:
    """Occupancy of ``policy`` when the transitions are the empirical model."""
    return forward_occupancy(p_bar, mu, policy)


def init_state(mdp: TabularMdp, config: OalConfig, rng, expert_data=None) -> OalState:
    """Initial learner state; ``rng`` is one generator or a list (one per learner).

    For a batch, ``expert_data`` is ``(B, N, H, 2)``; otherwise ``(N, H, 2)``.
    """
    H, S, A = mdp.shape
    batched = isinstance(rng, (list, tuple))
    batch = (len(rng),) if batched else ()
    if (config.bc_init or config.expert_model_init) and expert_data is None:
        raise ValueError("bc_init / expert_model_init need expert data")
    if config.bc_init:
        data = expert_data if batched else [expert_data]
        policy = np.stack([bc_policy(d, S, A) for d in data]).reshape(batch + (H, S, A))
    else:
        policy = np.broadcast_to(uniform_policy(H, S, A), batch + (H, S, A)).copy()
    cost = np.full(batch + (H, S, A), float(config.initial_cost))
    counters = _model.VisitCounters.empty(H, S, A, batch)
    if config.expert_model_init:
        data = np.asarray(expert_data)
        for j in range(data.shape[-3]):
            _model.record_inplace(counters, data[..., j, :, :])
    return OalState(policy, cost, counters, 0, UniformStream(rng, 2 * H))


def _step(state: OalState, mdp: TabularMdp, expert_occ: np.ndarray, config: OalConfig) -> None:
    H, S, A = mdp.shape
    mu = mdp.initial_dist
    # (1) act in the true MDP with pi^k
    traj = rollout(mdp.dynamics, mu, state.policy, state.rng.next())
    # (2) model and bonus from counters through episode k-1
    p_bar = _model.estimate_dynamics(state.counters)
    bonus = _model.ucb_bonus(state.counters, H, S, A, max(config.K, 1), config.delta_prime, config.bonus_scale)
    # (3) estimated occupancy of pi^k under p_bar^{k-1}
    d_hat = model_occupancy(p_bar, state.policy, mu)
    # (4) optimistic evaluation
    _, Q = optimistic_evaluate(p_bar, state.cost, bonus, state.policy)
    # (5), (6) simultaneous updates
    state.policy = policy_update(state.policy, Q, config.policy_step(H, A))
    state.cost = cost_update(state.cost, d_hat, expert_occ, config.cost_step(S, A))
    # (7) only now does episode k enter the counters
    _model.record_inplace(state.counters, traj)
    state.k += 1


def run_episode(state: OalState, mdp: TabularMdp, expert_occ, config: OalConfig) -> OalState:
    """One episode of the learner; returns a new state and leaves ``state`` untouched."""
    if state.k >= config.K:
        raise ValueError(f"episode budget exhausted (k={state.k}, K={config.K})")
    new = state.copy()
    _step(new, mdp, np.asarray(expert_occ, float), config)
    return new


def checkpoint_episodes(K: int, every: int) -> list[int]:
    ks = list(range(0, K + 1, every))
    if ks[-1] != K:
        ks.append(K)
    return ks


def _drive(state: OalState, mdp: TabularMdp, expert_occ: np.ndarray, config: OalConfig,
           reference=None) -> RunLog:
    episodes = checkpoint_episodes(config.K, config.eval_every)
    batch = state.policy.shape[:-3]
    ref = np.zeros(mdp.shape) if reference is None else np.asarray(reference, float)
    gap = np.zeros(batch + mdp.shape)
    gap_log = [gap.copy()]
    occ_log = [forward_occupancy(mdp.dynamics, mdp.initial_dist, state.policy)]
    for k in range(1, config.K + 1):
        # evaluation only, never read by the learner
        occ = forward_occupancy(mdp.dynamics, mdp.initial_dist, state.policy)
        gap += occ - ref
        _step(state, mdp, expert_occ, config)
        if k == episodes[len(gap_log)]:
            gap_log.append(gap.copy())
            occ_log.append(occ)
    return RunLog(config, episodes, ref, np.stack(gap_log), np.stack(occ_log), state.policy, state.cost)


def _drive_compiled(state: OalState, mdp: TabularMdp, expert_occ: np.ndarray, config: OalConfig,
                    reference=None) -> RunLog:
    from ._kernels import run_learner

    H, S, A = mdp.shape
    episodes = checkpoint_episodes(config.K, config.eval_every)
    batch = state.policy.shape[:-3]
    ref = np.zeros(mdp.shape) if reference is None else np.asarray(reference, float)
    coef = _model.bonus_coefficient(H, S, A, max(config.K, 1), config.delta_prime, config.bonus_scale)
    t_pi, t_c = config.policy_step(H, A), config.cost_step(S, A)
    B = int(np.prod(batch, dtype=int))
    policy = state.policy.reshape((B, H, S, A))
    cost = state.cost.reshape((B, H, S, A))
    n = state.counters.n.reshape((B, H, S, A))
    m = state.counters.m.reshape((B, H, S, A, S))
    e_occ = np.broadcast_to(expert_occ, batch + mdp.shape).reshape((B, H, S, A))
    gap_log = np.zeros((B, len(episodes), H, S, A))
    occ_log = np.zeros((B, len(episodes), H, S, A))
    marks = np.asarray(episodes[1:], np.int64)
    for i, g in enumerate(state.rng.rngs):
        occ_log[i, 0] = forward_occupancy(mdp.dynamics, mdp.initial_dist, policy[i])
        u = g.random((config.K, 2 * H))
        run_learner(mdp.dynamics, mdp.initial_dist, ref, np.ascontiguousarray(e_occ[i]), policy[i], cost[i],
                    n[i], m[i], u, t_pi, t_c, coef, marks, gap_log[i], occ_log[i])
    state.k += config.K
    gap_log = np.moveaxis(gap_log, 1, 0).reshape((len(episodes),) + batch + mdp.shape)
    occ_log = np.moveaxis(occ_log, 1, 0).reshape((len(episodes),) + batch + mdp.shape)
    return RunLog(config, episodes, ref, gap_log, occ_log, state.policy, state.cost)


_ENGINES = {"compiled": _drive_compiled, "numpy": _drive}


def run(mdp: TabularMdp, expert_data: np.ndarray, config: OalConfig, rng: np.random.Generator,
        reference=None, engine: str = "compiled") -> RunLog:
    """Run the learner for ``config.K`` episodes against demonstrations ``expert_data``.

    ``reference`` (typically the true expert occupancy) only changes what the
    log accumulates, making zero gaps exactly zero. ``engine="numpy"`` steps
    through :func:`run_episode`'s vectorized operations instead of the
    compiled loop; both consume ``rng`` identically.
    """
    H, S, A = mdp.shape
    expert_occ = empirical_occupancy(expert_data, S, A)
    state = init_state(mdp, config, rng, expert_data)
    return _ENGINES[engine](state, mdp, expert_occ, config, reference)


def run_batch(mdp: TabularMdp, expert_data: np.ndarray, config: OalConfig, rngs,
              reference=None, engine: str = "compiled") -> RunLog:
    """Run ``len(rngs)`` independent learners; ``expert_data`` is ``(B, N, H, 2)``."""
    H, S, A = mdp.shape
    expert_data = np.asarray(expert_data)
    if len(expert_data) != len(rngs):
        raise ValueError("need one demonstration set per learner")
    expert_occ = np.stack([empirical_occupancy(d, S, A) for d in expert_data])
    state = init_state(mdp, config, list(rngs), expert_data)
    return _ENGINES[engine](state, mdp, expert_occ, config, reference)


def replay(mdp: TabularMdp, policy, config: OalConfig, reference=None) -> RunLog:
    """Log of a learner that plays the fixed ``policy`` every episode (no learning).

    Gaps are formed as ``k * (d - reference)`` rather than by repeated addition.
    """
    policy = np.asarray(policy, float)
    episodes = checkpoint_episodes(config.K, config.eval_every)
    ref = np.zeros(mdp.shape) if reference is None else np.asarray(reference, float)
    occ = forward_occupancy(mdp.dynamics, mdp.initial_dist, policy)
    ks = np.asarray(episodes, float).reshape((-1,) + (1,) * occ.ndim)
    cum_gap = ks * (occ - ref)
    occ_log = np.broadcast_to(occ, cum_gap.shape).copy()
    return RunLog(config, episodes, ref, cum_gap, occ_log, policy, np.full(policy.shape, config.initial_cost))
