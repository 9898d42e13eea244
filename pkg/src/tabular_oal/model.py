"""Visit counters, the empirical transition model and UCB bonuses."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass
class VisitCounters:
    """State-action counts ``n[..., h, s, a]`` and transition counts ``m[..., h, s, a, s']``.

    The final step never observes a successor, so ``m[..., H-1]`` stays zero.
    Leading axes, when present, index independent learners.
    """

    n: np.ndarray
    m: np.ndarray

    @classmethod
    def empty(cls, H: int, S: int, A: int, batch: tuple[int, ...] = ()) -> "VisitCounters":
        return cls(np.zeros(batch + (H, S, A), np.int64), np.zeros(batch + (H, S, A, S), np.int64))

    def copy(self) -> "VisitCounters":
        return VisitCounters(self.n.copy(), self.m.copy())

    def to_dict(self) -> dict:
        return {"n": self.n.tolist(), "m": self.m.tolist()}

    @classmethod
    def from_dict(cls, obj: dict) -> "VisitCounters":
        return cls(np.asarray(obj["n"], np.int64), np.asarray(obj["m"], np.int64))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "VisitCounters":
        return cls.from_dict(json.loads(Path(path).read_text()))


def record_trajectory(counters: VisitCounters, traj: np.ndarray) -> VisitCounters:
    """Return new counters with ``traj`` added. ``traj`` is ``(..., H, 2)`` matching the batch axes."""
    out = counters.copy()
    record_inplace(out, traj)
    return out


def record_inplace(counters: VisitCounters, traj: np.ndarray) -> None:
    traj = np.asarray(traj)
    H, S, A = counters.n.shape[-3:]
    batch = counters.n.shape[:-3]
    if traj.shape != batch + (H, 2):
        raise ValueError(f"trajectory shape {traj.shape} does not match counters {batch + (H, 2)}")
    s, a = traj[..., 0], traj[..., 1]
    if s.min() < 0 or s.max() >= S or a.min() < 0 or a.max() >= A:
        raise IndexError("state or action index out of range")
    # every (batch, h) cell is hit exactly once, so plain fancy-index increments are safe
    idx = tuple(np.broadcast_to(i[..., None], batch + (H,)) for i in np.indices(batch))
    steps = np.broadcast_to(np.arange(H), batch + (H,))
    counters.n[(*idx, steps, s, a)] += 1
    counters.m[(*(i[..., :-1] for i in idx), steps[..., :-1], s[..., :-1], a[..., :-1], s[..., 1:])] += 1


def warm_start_from_expert(counters: VisitCounters, data: np.ndarray) -> VisitCounters:
    """Counters after recording every expert trajectory in ``data`` (``(N, H, 2)``)."""
    out = counters.copy()
    for traj in np.asarray(data):
        record_inplace(out, traj)
    return out


def estimate_dynamics(counters: VisitCounters) -> np.ndarray:
    """Empirical transitions ``m / n``; rows with no observed successor are uniform."""
    m = counters.m.astype(np.float64)
    S = m.shape[-1]
    totals = m.sum(-1, keepdims=True)
    uniform = np.full_like(m, 1.0 / S)
    return np.divide(m, totals, out=uniform, where=totals > 0)


def bonus_log_term(H: int, S: int, A: int, K: int, delta_prime: float) -> float:
    if K < 1:
        raise ValueError("K must be >= 1")
    if not 0.0 < delta_prime < 1.0:
        raise ValueError("delta_prime must lie in (0, 1)")
    return float(np.log(3.0 * H * H * S * A * K / delta_prime))


def ucb_bonus(counters: VisitCounters, H: int, S: int, A: int, K: int,
              delta_prime: float, bonus_scale: float = 1.0) -> np.ndarray:
    """Hoeffding-style exploration bonus ``sqrt(4 H^2 S log(3 H^2 S A K / delta') / max(n, 1))``."""
    if bonus_scale < 0:
        raise ValueError("bonus_scale must be >= 0")
    bonus_log_term(H, S, A, K, delta_prime)
    if bonus_scale == 0:
        return np.zeros(counters.n.shape)
    return bonus_coefficient(H, S, A, K, delta_prime, bonus_scale) / np.sqrt(np.maximum(counters.n, 1))


def bonus_coefficient(H: int, S: int, A: int, K: int, delta_prime: float, bonus_scale: float = 1.0) -> float:
    """The bonus at a single visit, ``bonus_scale * sqrt(4 H^2 S log(3 H^2 S A K / delta'))``."""
    return bonus_scale * float(np.sqrt(4.0 * H * H * S * bonus_log_term(H, S, A, K, delta_prime)))
