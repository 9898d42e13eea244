"""Exact apprenticeship-learning regret over the unit-box cost class.

For costs in ``[0, 1]^(H x S x A)`` the worst-case cumulative value gap is a
linear maximization over a box, which splits per coordinate: each cell
contributes the positive part of its cumulative occupancy gap.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .mdp_core import ShapeError, evaluate, occupancy


@dataclass
class CumulativeGap:
    gap: np.ndarray
    episodes: int = 0

    @classmethod
    def zeros(cls, H: int, S: int, A: int) -> "CumulativeGap":
        return cls(np.zeros((H, S, A)), 0)


def accumulate(gap: CumulativeGap, d_pi, d_expert) -> CumulativeGap:
    d_pi, d_expert = np.asarray(d_pi, float), np.asarray(d_expert, float)
    if d_pi.shape != gap.gap.shape or d_expert.shape != gap.gap.shape:
        raise ShapeError("occupancies must match the gap shape")
    return CumulativeGap(gap.gap + (d_pi - d_expert), gap.episodes + 1)


def al_regret(gap) -> float | np.ndarray:
    """``max_{c in [0,1]^n} <c, gap>``, i.e. the sum of positive parts over the last three axes."""
    g = gap.gap if isinstance(gap, CumulativeGap) else np.asarray(gap, float)
    return np.maximum(g, 0.0).sum(axis=(-3, -2, -1))


def al_regret_bruteforce(gap, max_cells: int = 20) -> float:
    """Same maximum, by enumerating every vertex of the cost box."""
    g = gap.gap if isinstance(gap, CumulativeGap) else np.asarray(gap, float)
    flat = g.ravel()
    if flat.size > max_cells:
        raise ValueError(f"{flat.size} cells exceeds the enumeration guard of {max_cells}")
    best = 0.0
    for vertex in itertools.product((0.0, 1.0), repeat=flat.size):
        best = max(best, float(np.dot(vertex, flat)))
    return best


def expert_value_gap(mdp, policy, expert, cost) -> float:
    """Expected value difference ``E_mu[V1^{pi,c} - V1^{expert,c}]`` for a single fixed cost."""
    mu = mdp.initial_dist
    v_pi = evaluate(mdp, cost, policy).V[0]
    v_e = evaluate(mdp, cost, expert).V[0]
    return float(mu @ (v_pi - v_e))


@dataclass
class RegretCurve:
    episodes: np.ndarray
    regret: np.ndarray  # (n_checkpoints,) or (n_checkpoints, B) for a batched log

    def final(self) -> float | np.ndarray:
        return self.regret[-1]

    def at(self, episode: int):
        i = int(np.searchsorted(self.episodes, episode))
        if i >= len(self.episodes) or self.episodes[i] != episode:
            raise KeyError(f"episode {episode} is not a checkpoint")
        return self.regret[i]


def build_curve(run_log, mdp, expert) -> RegretCurve:
    """Regret at each checkpoint of ``run_log`` against the true expert occupancy.

    Every episode contributes to the gap; the checkpoint stride only decides
    where the regret is read off.
    """
    cum_gap = getattr(run_log, "cum_gap", None)
    if cum_gap is None:
        raise ValueError("run log carries no occupancy data")
    d_e = occupancy(mdp, expert)
    episodes = np.asarray(run_log.episodes)
    gap = np.asarray(cum_gap)
    if not np.array_equal(run_log.reference, d_e):
        k = episodes.reshape((-1,) + (1,) * (gap.ndim - 1))
        gap = gap + k * (run_log.reference - d_e)
    regret = al_regret(gap)
    run_log.regret = regret
    return RegretCurve(episodes, regret)
