"""Expert demonstrations: collection, empirical occupancy, behavioral cloning.

A trajectory set is an integer array of shape ``(N, H, 2)`` whose last axis
holds ``(state, action)``.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .mdp_core import TabularMdp, ShapeError, rollout


def collect_expert_data(mdp: TabularMdp, expert, n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample ``n`` independent expert episodes."""
    if n < 1:
        raise ValueError("need at least one trajectory")
    u = rng.random((n, 2 * mdp.horizon))
    return rollout(mdp.dynamics, mdp.initial_dist, np.asarray(expert, float), u)


def visit_counts(data: np.ndarray, num_states: int, num_actions: int) -> np.ndarray:
    """Integer ``(H, S, A)`` table of how many trajectories hit ``(s, a)`` at each step."""
    data = np.asarray(data)
    if data.ndim != 3 or data.shape[-1] != 2 or len(data) == 0:
        raise ShapeError(f"expected a nonempty (N, H, 2) trajectory array, got {data.shape}")
    N, H, _ = data.shape
    counts = np.zeros((H, num_states, num_actions), dtype=np.int64)
    steps = np.broadcast_to(np.arange(H), (N, H))
    np.add.at(counts, (steps, data[..., 0], data[..., 1]), 1)
    return counts


def empirical_occupancy(data: np.ndarray, num_states: int, num_actions: int) -> np.ndarray:
    """Fraction of trajectories at ``(s, a)`` at each step; each step sums to one."""
    return visit_counts(data, num_states, num_actions) / len(data)


def bc_policy(data: np.ndarray, num_states: int, num_actions: int) -> np.ndarray:
    """Behavioral cloning by conditional action frequencies, uniform where a state was never seen."""
    counts = visit_counts(data, num_states, num_actions).astype(np.float64)
    totals = counts.sum(-1, keepdims=True)
    uniform = np.full_like(counts, 1.0 / num_actions)
    return np.divide(counts, totals, out=uniform, where=totals > 0)


def save_trajectories(data: np.ndarray, path, num_states: int, num_actions: int) -> None:
    """Write the JSON-lines trajectory format (header line, then one trajectory per line)."""
    data = np.asarray(data)
    lines = [json.dumps({"horizon": data.shape[1], "num_states": num_states, "num_actions": num_actions})]
    lines += [json.dumps({"steps": traj.tolist()}) for traj in data]
    Path(path).write_text("\n".join(lines) + "\n")


def load_trajectories(path) -> tuple[np.ndarray, dict]:
    """Read a trajectory file, returning ``(data, header)``."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty trajectory file")
    header = json.loads(lines[0])
    H, S, A = header["horizon"], header["num_states"], header["num_actions"]
    trajs = []
    for lineno, line in enumerate(lines[1:], start=2):
        steps = np.asarray(json.loads(line)["steps"], dtype=np.int64)
        if steps.shape != (H, 2):
            raise ShapeError(f"{path}:{lineno}: trajectory has shape {steps.shape}, expected {(H, 2)}")
        if steps.min() < 0 or np.any(steps[:, 0] >= S) or np.any(steps[:, 1] >= A):
            raise ValueError(f"{path}:{lineno}: state or action index out of range")
        trajs.append(steps)
    if not trajs:
        raise ValueError(f"{path}: no trajectories")
    return np.stack(trajs), header
