"""Command-line entry point: ``tabular-oal {chain,fifty,custom,selftest}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .envs import DEFAULT_ALPHAS
from .oal import OalConfig
from .selftest import run_selftest

PRESETS = {
    "chain": {"episodes": 10_000, "trajectories": [1, 5, 20, 100], "alphas": [0.2]},
    "fifty": {"episodes": 1_000, "trajectories": [1, 10, 50, 5000]},
    "custom": {"episodes": 1_000, "trajectories": [1, 10]},
}
COMMON_DEFAULTS = {
    "seeds": 100, "base_seed": 0, "bonus_scale": harness.DEFAULT_BONUS_SCALE, "eval_every": 10,
    "horizon": 32, "jobs": 0, "out": "results.csv", "svg": None, "no_explore": False,
    "bc_init": False, "expert_model_init": False, "bc_compare": False, "variants": None,
    "mdp": None, "expert": None,
}


def _csv_list(kind):
    def parse(text):
        return [kind(x) for x in text.split(",") if x.strip()]
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tabular-oal", description="Tabular online apprenticeship learning experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def run_flags(p, chain=False, fifty=False, custom=False):
        # defaults are None so that config-file values are only overridden by explicit flags
        p.add_argument("--config", help="JSON file with flag values (flags take precedence)")
        p.add_argument("--episodes", type=int, help="episodes per run (K)")
        p.add_argument("--trajectories", type=_csv_list(int), help="comma list of expert trajectory counts N")
        p.add_argument("--seeds", type=int)
        p.add_argument("--base-seed", type=int)
        p.add_argument("--bonus-scale", type=float, help="multiplier on the UCB bonus")
        p.add_argument("--no-explore", action="store_const", const=True, help="only run without the UCB bonus")
        p.add_argument("--bc-init", action="store_const", const=True, help="start the policy from behavioral cloning")
        p.add_argument("--expert-model-init", action="store_const", const=True,
                       help="seed the transition counts with the expert data")
        p.add_argument("--variants", type=_csv_list(str), help="explicit comma list of variant labels")
        p.add_argument("--eval-every", type=int, help="checkpoint stride in episodes")
        p.add_argument("--out", help="aggregate CSV path; per-seed values go next to it as *.raw.csv")
        p.add_argument("--svg", help="optional SVG chart path")
        p.add_argument("--jobs", type=int, help="worker processes (0 = all cores)")
        if chain:
            p.add_argument("--horizon", type=int)
            p.add_argument("--alpha", type=float)
            p.add_argument("--alphas", type=_csv_list(float), help=f"comma list, e.g. {','.join(map(str, DEFAULT_ALPHAS))}")
        if fifty:
            p.add_argument("--bc-compare", action="store_const", const=True,
                           help="compare frozen BC against OAL initialized from it")
        if custom:
            p.add_argument("--mdp", required=True, help="MDP JSON file")
            p.add_argument("--expert", help="expert policy JSON (if not embedded in the MDP file)")

    run_flags(sub.add_parser("chain", help="stochastic chain exploration study"), chain=True)
    run_flags(sub.add_parser("fifty", help="fifty-start environment"), fifty=True)
    run_flags(sub.add_parser("custom", help="MDP loaded from JSON"), custom=True)
    sub.add_parser("selftest", help="run the oracle cross-checks")
    return parser


def resolve_options(args: argparse.Namespace) -> dict:
    """Preset defaults, then config file values, then explicit flags."""
    opts = dict(COMMON_DEFAULTS)
    opts.update(PRESETS[args.command])
    if args.config:
        loaded = json.loads(Path(args.config).read_text())
        unknown = set(k.replace("-", "_") for k in loaded) - set(opts) - {"alpha", "alphas"}
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        opts.update({k.replace("-", "_"): v for k, v in loaded.items()})
    for key, value in vars(args).items():
        if value is not None and key not in ("command", "config", "verbose"):
            opts[key] = value
    if opts.get("alpha") is not None:
        opts["alphas"] = [opts["alpha"]]
    return opts


def _variants(opts: dict) -> tuple[str, ...]:
    if opts["variants"]:
        return tuple(opts["variants"])
    explorations = ("no-ucb",) if opts["no_explore"] else ("ucb", "no-ucb")
    bc, emi = bool(opts["bc_init"]), bool(opts["expert_model_init"])
    init = "both" if bc and emi else "bc-init" if bc else "expert-model-init" if emi else "plain"
    return tuple(harness.variant_label(e, init) for e in explorations)


def spec_from_options(command: str, opts: dict) -> harness.ExperimentSpec:
    config = OalConfig(K=int(opts["episodes"]), bonus_scale=float(opts["bonus_scale"]),
                       eval_every=int(opts["eval_every"]))
    spec = harness.ExperimentSpec(
        environment=command,
        config=config,
        N_values=tuple(int(n) for n in opts["trajectories"]),
        alpha_values=tuple(float(a) for a in opts.get("alphas") or (0.2,)),
        variants=_variants(opts),
        seeds=int(opts["seeds"]),
        base_seed=int(opts["base_seed"]),
        horizon=int(opts["horizon"]),
        mdp_path=opts["mdp"],
        expert_path=opts["expert"],
        jobs=int(opts["jobs"]),
    )
    if command == "fifty" and opts["bc_compare"]:
        spec = harness.bc_comparison_spec(spec)
    return spec


def raw_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".raw.csv")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "selftest":
        return 0 if run_selftest() else 1

    opts = resolve_options(args)
    try:
        spec = spec_from_options(args.command, opts)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    results = harness.run_cells(spec)
    rows = harness.aggregate(results)
    harness.emit_csv(rows, opts["out"])
    harness.emit_raw_csv(results, raw_path(opts["out"]))
    if opts["svg"]:
        x = "N" if len(spec.N_values) > 1 else "episode"
        harness.emit_svg(rows, opts["svg"], replace(harness.PlotSpec(), x=x, log_x=x == "N", title=args.command))
    for (variant, N, alpha), row in sorted(harness.final_rows(rows).items(), key=lambda kv: kv[1].sort_key()):
        a = "" if alpha is None else f" alpha={alpha:g}"
        print(f"{variant:<28} N={N:<5}{a} final regret {row.mean_regret:.4g} +- {row.ci_halfwidth:.3g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
