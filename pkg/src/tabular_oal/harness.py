"""Seeded experiment grids, aggregation with 95% intervals, CSV and SVG output.

Seeds are assigned before anything runs: learner ``i`` of the cell with
``(N, alpha)`` always receives ``base_seed + index`` where ``index`` depends
only on ``(alpha, N, i)``. Exploration and initialization variants therefore
share expert data and learner randomness (a paired comparison), and results
never depend on how cells are scheduled across worker processes.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .envs import ChainSpec, fifty_start_mdp, stochastic_chain
from .evaluation import build_curve
from .expert import bc_policy, collect_expert_data
from .mdp_core import TabularMdp, load_mdp, load_policy, occupancy
from .oal import OalConfig, checkpoint_episodes, replay, run_batch

log = logging.getLogger(__name__)

# bonus multiplier used by the experiment presets; the theoretical constant (1.0)
# exceeds any cost until visit counts reach ~10^5 and freezes the policy
DEFAULT_BONUS_SCALE = 0.005

EXPLORATION = ("ucb", "no-ucb")
INITS = ("plain", "bc-init", "expert-model-init", "both")
CSV_HEADER = ["variant", "N", "alpha", "episode", "mean_regret", "ci95", "seeds"]


def variant_label(exploration: str, init: str = "plain") -> str:
    if exploration not in EXPLORATION or init not in INITS:
        raise ValueError(f"unknown variant {exploration!r}/{init!r}")
    return exploration if init == "plain" else f"{exploration}+{init}"


def parse_variant(label: str) -> tuple[str, str]:
    exploration, _, init = label.partition("+")
    init = init or "plain"
    variant_label(exploration, init)
    return exploration, init


@dataclass(frozen=True)
class ExperimentSpec:
    environment: str = "chain"  # chain | fifty | custom
    config: OalConfig = field(default_factory=lambda: OalConfig(bonus_scale=DEFAULT_BONUS_SCALE))
    N_values: tuple[int, ...] = (1, 5, 20, 100)
    alpha_values: tuple[float, ...] = (0.2,)
    variants: tuple[str, ...] = ("ucb", "no-ucb")
    seeds: int = 100
    base_seed: int = 0
    horizon: int = 32
    mdp_path: str | None = None
    expert_path: str | None = None
    jobs: int = 0  # 0 -> all available cores

    def __post_init__(self):
        if self.environment not in ("chain", "fifty", "custom"):
            raise ValueError(f"unknown environment {self.environment!r}")
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")
        if not self.N_values or not self.variants or not self.alpha_values:
            raise ValueError("N_values, alpha_values and variants must be nonempty")
        if any(n < 1 for n in self.N_values):
            raise ValueError("every N must be >= 1")
        for v in self.variants:
            if v not in ("bc-only", "oal-bc-init"):
                parse_variant(v)
        if self.environment == "custom" and self.mdp_path is None:
            raise ValueError("custom environment needs mdp_path")

    def alphas(self) -> tuple:
        return tuple(self.alpha_values) if self.environment == "chain" else (None,)


@dataclass(frozen=True)
class AggregateRow:
    variant: str
    N: int
    alpha: float | None
    episode: int
    mean_regret: float
    ci_halfwidth: float
    seeds: int

    def sort_key(self):
        return (self.variant, self.N, -1.0 if self.alpha is None else self.alpha, self.episode)


@dataclass
class CellResult:
    variant: str
    N: int
    alpha: float | None
    seeds: np.ndarray  # (B,) run seeds
    episodes: np.ndarray  # (n_checkpoints,)
    regret: np.ndarray  # (n_checkpoints, B)


def build_environment(spec: ExperimentSpec, alpha=None) -> tuple[TabularMdp, np.ndarray]:
    if spec.environment == "chain":
        return stochastic_chain(ChainSpec(spec.horizon, alpha))
    if spec.environment == "fifty":
        return fifty_start_mdp()
    mdp, expert = load_mdp(spec.mdp_path)
    if spec.expert_path is not None:
        expert = load_policy(spec.expert_path, mdp.shape)
    if expert is None:
        raise ValueError("custom environment needs an expert policy (in the MDP file or expert_path)")
    return mdp, expert


def run_seeds(spec: ExperimentSpec, alpha, N: int) -> np.ndarray:
    """The pre-assigned run seeds for the ``(alpha, N)`` cell."""
    alphas = spec.alphas()
    block = alphas.index(alpha) * len(spec.N_values) + list(spec.N_values).index(N)
    return spec.base_seed + block * spec.seeds + np.arange(spec.seeds)


def _streams(seed: int):
    data_ss, learner_ss = np.random.SeedSequence(int(seed)).spawn(2)
    return np.random.default_rng(data_ss), np.random.default_rng(learner_ss)


def run_cell(spec: ExperimentSpec, variant: str, N: int, alpha) -> CellResult:
    """All seeds of one grid cell; a failure is narrowed down to the seed that caused it."""
    try:
        return _run_cell(spec, variant, N, alpha, run_seeds(spec, alpha, N))
    except Exception as exc:
        for s in run_seeds(spec, alpha, N):
            try:
                _run_cell(spec, variant, N, alpha, np.array([s]))
            except Exception as inner:
                raise RuntimeError(f"run failed: variant={variant} N={N} alpha={alpha} seed={s}: {inner}") from inner
        raise RuntimeError(f"run failed: variant={variant} N={N} alpha={alpha}: {exc}") from exc


def _run_cell(spec: ExperimentSpec, variant: str, N: int, alpha, seeds: np.ndarray) -> CellResult:
    mdp, expert = build_environment(spec, alpha)
    d_e = occupancy(mdp, expert)
    streams = [_streams(s) for s in seeds]
    data = np.stack([collect_expert_data(mdp, expert, N, ds) for ds, _ in streams])
    H, S, A = mdp.shape
    config = spec.config

    if variant == "bc-only":
        regrets = []
        for d in data:
            run_log = replay(mdp, bc_policy(d, S, A), config, reference=d_e)
            regrets.append(build_curve(run_log, mdp, expert).regret)
        return CellResult(variant, N, alpha, seeds, np.asarray(run_log.episodes), np.stack(regrets, axis=1))

    if variant == "oal-bc-init":
        config = replace(config, bc_init=True)
    else:
        exploration, init = parse_variant(variant)
        config = replace(
            config,
            bonus_scale=config.bonus_scale if exploration == "ucb" else 0.0,
            bc_init=init in ("bc-init", "both"),
            expert_model_init=init in ("expert-model-init", "both"),
        )
    run_log = run_batch(mdp, data, config, [ls for _, ls in streams], reference=d_e)
    curve = build_curve(run_log, mdp, expert)
    return CellResult(variant, N, alpha, seeds, curve.episodes, curve.regret)


def _run_cell_args(args):
    return run_cell(*args)


def grid_cells(spec: ExperimentSpec) -> list[tuple[str, int, float | None]]:
    return [(v, n, a) for v in spec.variants for n in spec.N_values for a in spec.alphas()]


def run_cells(spec: ExperimentSpec, jobs: int | None = None) -> list[CellResult]:
    """Run every ``(variant, N, alpha)`` cell; the returned list is in grid order."""
    cells = grid_cells(spec)
    jobs = spec.jobs if jobs is None else jobs
    if jobs <= 0:
        jobs = os.cpu_count() or 1
    args = [(spec, *cell) for cell in cells]
    if jobs == 1 or len(cells) == 1:
        results = []
        for a in args:
            log.info("running cell variant=%s N=%s alpha=%s", *a[1:])
            results.append(_run_cell_args(a))
        return results
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_cell_args, a) for a in args]
        return [fut.result() for fut in futures]


def ci95(values) -> float:
    """Normal-approximation half width ``1.96 s / sqrt(n)``; zero for a single value."""
    values = np.asarray(values, float)
    if values.size < 2:
        return 0.0
    return float(1.96 * values.std(ddof=1) / math.sqrt(values.size))


def aggregate(results: list[CellResult]) -> list[AggregateRow]:
    rows = []
    for r in results:
        for i, k in enumerate(r.episodes):
            vals = r.regret[i]
            rows.append(AggregateRow(r.variant, r.N, r.alpha, int(k), float(vals.mean()), ci95(vals), vals.size))
    return sorted(rows, key=AggregateRow.sort_key)


def run_grid(spec: ExperimentSpec, jobs: int | None = None) -> list[AggregateRow]:
    """Mean regret curves with 95% intervals for every ``(variant, N, alpha)``."""
    return aggregate(run_cells(spec, jobs))


def bc_comparison_spec(spec: ExperimentSpec) -> ExperimentSpec:
    if spec.environment != "fifty":
        raise ValueError("the BC comparison runs on the fifty-start environment")
    return replace(spec, variants=("bc-only", "oal-bc-init"))


def run_bc_comparison(spec: ExperimentSpec, jobs: int | None = None) -> list[AggregateRow]:
    """Frozen BC policy against the learner warm-started from it, across ``N_values``."""
    return run_grid(bc_comparison_spec(spec), jobs)


def _fmt_alpha(alpha) -> str:
    return "" if alpha is None else repr(float(alpha))


def emit_csv(rows: list[AggregateRow], path) -> None:
    rows = sorted(rows, key=AggregateRow.sort_key)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.variant, r.N, _fmt_alpha(r.alpha), r.episode, repr(r.mean_regret), repr(r.ci_halfwidth), r.seeds])
    Path(path).write_text(buf.getvalue(), newline="")


def read_csv(path) -> list[AggregateRow]:
    with open(path, newline="") as f:
        return [
            AggregateRow(d["variant"], int(d["N"]), float(d["alpha"]) if d["alpha"] else None, int(d["episode"]),
                         float(d["mean_regret"]), float(d["ci95"]), int(d["seeds"]))
            for d in csv.DictReader(f)
        ]


def emit_raw_csv(results: list[CellResult], path) -> None:
    """Per-seed regrets behind every aggregate row."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variant", "N", "alpha", "seed", "episode", "regret"])
    entries = []
    for r in results:
        for i, k in enumerate(r.episodes):
            for j, s in enumerate(r.seeds):
                entries.append(((r.variant, r.N, -1.0 if r.alpha is None else r.alpha, int(k), int(s)),
                                [r.variant, r.N, _fmt_alpha(r.alpha), int(s), int(k), repr(float(r.regret[i, j]))]))
    for _, row in sorted(entries, key=lambda e: e[0]):
        w.writerow(row)
    Path(path).write_text(buf.getvalue(), newline="")


@dataclass(frozen=True)
class PlotSpec:
    x: str = "episode"  # "episode" or "N"
    title: str = ""
    width: int = 640
    height: int = 400
    margin: int = 60
    log_x: bool = False


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _series(rows: list[AggregateRow], x: str) -> dict[str, list[AggregateRow]]:
    rows = sorted(rows, key=AggregateRow.sort_key)
    if x == "N":
        # one point per N: the final checkpoint of each cell
        last = {}
        for r in rows:
            key = (r.variant, r.alpha, r.N)
            if key not in last or r.episode > last[key].episode:
                last[key] = r
        rows = sorted(last.values(), key=AggregateRow.sort_key)
    series: dict[str, list[AggregateRow]] = {}
    for r in rows:
        label = r.variant if r.alpha is None else f"{r.variant} a={r.alpha:g}"
        if x == "episode":
            label += f" N={r.N}"
        series.setdefault(label, []).append(r)
    for pts in series.values():
        pts.sort(key=lambda r: getattr(r, x))
    return series


def _xval(r: AggregateRow, x: str, log_x: bool) -> float:
    v = float(getattr(r, x))
    return math.log10(v) if log_x else v


def plot_extent(rows: list[AggregateRow], x: str = "episode", log_x: bool = False) -> tuple[float, float, float, float]:
    """Axis ranges covering every ``mean +- ci`` with 5% padding (x in log10 units when ``log_x``)."""
    pts = [r for s in _series(rows, x).values() for r in s]
    xs = [_xval(r, x, log_x) for r in pts]
    lo = [r.mean_regret - r.ci_halfwidth for r in pts]
    hi = [r.mean_regret + r.ci_halfwidth for r in pts]

    def pad(a, b):
        span = (b - a) or 1.0
        return a - 0.05 * span, b + 0.05 * span

    return (*pad(min(xs), max(xs)), *pad(min(lo), max(hi)))


def emit_svg(rows: list[AggregateRow], path, plot: PlotSpec = PlotSpec()) -> None:
    if not rows:
        raise ValueError("nothing to plot")
    series = _series(rows, plot.x)
    if plot.log_x and any(getattr(r, plot.x) <= 0 for r in rows):
        raise ValueError("log x axis needs positive x values")
    x0, x1, y0, y1 = plot_extent(rows, plot.x, plot.log_x)
    W, Hh, M = plot.width, plot.height, plot.margin

    def sx(v):
        return M + (v - x0) / (x1 - x0) * (W - 2 * M)

    def sy(v):
        return Hh - M - (v - y0) / (y1 - y0) * (Hh - 2 * M)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{Hh}" viewBox="0 0 {W} {Hh}">',
        f'<rect x="0" y="0" width="{W}" height="{Hh}" fill="white"/>',
        f'<line x1="{M}" y1="{Hh - M}" x2="{W - M}" y2="{Hh - M}" stroke="black"/>',
        f'<line x1="{M}" y1="{M}" x2="{M}" y2="{Hh - M}" stroke="black"/>',
        f'<text x="{W / 2:.1f}" y="{Hh - 15}" text-anchor="middle" font-size="12">{"log10 " if plot.log_x else ""}{plot.x}</text>',
        f'<text x="15" y="{Hh / 2:.1f}" text-anchor="middle" font-size="12" transform="rotate(-90 15 {Hh / 2:.1f})">AL regret</text>',
        f'<text x="{M}" y="{Hh - M + 15}" font-size="10">{x0:.4g}</text>',
        f'<text x="{W - M}" y="{Hh - M + 15}" font-size="10" text-anchor="end">{x1:.4g}</text>',
        f'<text x="{M - 5}" y="{Hh - M}" font-size="10" text-anchor="end">{y0:.4g}</text>',
        f'<text x="{M - 5}" y="{M + 10}" font-size="10" text-anchor="end">{y1:.4g}</text>',
    ]
    if plot.title:
        out.append(f'<text x="{W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{plot.title}</text>')
    for i, (label, pts) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        coords = " ".join(f"{sx(_xval(r, plot.x, plot.log_x)):.2f},{sy(r.mean_regret):.2f}" for r in pts)
        out.append(f'<g class="series" data-label="{label}">')
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        for r in pts:
            xx = sx(_xval(r, plot.x, plot.log_x))
            out.append(f'<line class="errorbar" x1="{xx:.2f}" y1="{sy(r.mean_regret - r.ci_halfwidth):.2f}" '
                       f'x2="{xx:.2f}" y2="{sy(r.mean_regret + r.ci_halfwidth):.2f}" stroke="{color}"/>')
        out.append("</g>")
        out.append(f'<text x="{W - M + 5 - 120}" y="{M + 14 * i}" font-size="10" fill="{color}">{label}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def final_rows(rows: list[AggregateRow]) -> dict[tuple, AggregateRow]:
    """The last-checkpoint row of each ``(variant, N, alpha)`` cell."""
    out = {}
    for r in rows:
        key = (r.variant, r.N, r.alpha)
        if key not in out or r.episode > out[key].episode:
            out[key] = r
    return out


__all__ = [
    "AggregateRow", "CellResult", "ExperimentSpec", "PlotSpec", "DEFAULT_BONUS_SCALE",
    "aggregate", "ci95", "emit_csv", "emit_raw_csv", "emit_svg", "final_rows", "plot_extent",
    "read_csv", "run_bc_comparison", "run_cells", "run_grid", "variant_label", "checkpoint_episodes",
]
