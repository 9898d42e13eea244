"""The two tabular environments used in the experiments, plus a file loader."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mdp_core import TabularMdp, load_mdp

DEFAULT_ALPHAS = (0.05, 0.1, 0.2, 0.4)


@dataclass(frozen=True)
class ChainSpec:
    horizon: int = 32
    alpha: float = 0.2

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


def stochastic_chain(spec: ChainSpec = ChainSpec()) -> tuple[TabularMdp, np.ndarray]:
    """Two-state chain: ``a0`` keeps ``s0`` w.p. ``1 - alpha``; everything else falls to absorbing ``s1``.

    Returns the MDP (start in ``s0``) and the expert that always plays ``a0``.
    """
    H, a = spec.horizon, spec.alpha
    step = np.array([
        [[1.0 - a, a], [0.0, 1.0]],  # from s0: a0, a1
        [[0.0, 1.0], [0.0, 1.0]],    # from s1: both actions stay
    ])
    mdp = TabularMdp(np.array([1.0, 0.0]), np.broadcast_to(step, (H, 2, 2, 2)).copy())
    expert = np.zeros((H, 2, 2))
    expert[..., 0] = 1.0
    return mdp, expert


def fifty_start_mdp(horizon: int = 2, num_states: int = 50) -> tuple[TabularMdp, np.ndarray]:
    """Uniform start over ``num_states``; ``a0`` jumps to the target state (index 0), ``a1`` stays put.

    Returns the MDP and the expert that always plays ``a0``.
    """
    S = num_states
    step = np.zeros((S, 2, S))
    step[:, 0, 0] = 1.0
    step[np.arange(S), 1, np.arange(S)] = 1.0
    mdp = TabularMdp(np.full(S, 1.0 / S), np.broadcast_to(step, (horizon, S, 2, S)).copy())
    expert = np.zeros((horizon, S, 2))
    expert[..., 0] = 1.0
    return mdp, expert


__all__ = ["ChainSpec", "DEFAULT_ALPHAS", "stochastic_chain", "fifty_start_mdp", "load_mdp"]
