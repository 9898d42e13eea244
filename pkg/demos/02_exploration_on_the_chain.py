# coding: utf-8

# # Does exploration help the learner on the chain?
#
# The learner never sees the true costs, only N expert trajectories. On the
# chain, the expert's data barely covers the absorbing state, so the learner
# has to visit it itself to learn its dynamics. We compare the UCB bonus
# against no bonus on a modest grid (the full study is `tabular-oal chain`).

from tabular_oal import harness
from tabular_oal.oal import OalConfig

spec = harness.ExperimentSpec(
    environment="chain",
    config=OalConfig(K=3000, bonus_scale=harness.DEFAULT_BONUS_SCALE, eval_every=500),
    N_values=(1, 20),
    alpha_values=(0.2,),
    variants=("ucb", "no-ucb"),
    seeds=10,
    jobs=1,
)
rows = harness.run_grid(spec)


# Final regret per variant. Variants in a cell share expert data and random
# streams, so the comparison is paired.

for (variant, N, alpha), r in sorted(harness.final_rows(rows).items()):
    print(f"{variant:7s} N={N:3d}  regret {r.mean_regret:9.1f} +- {r.ci_halfwidth:.1f}")


# The whole curves, with 95% intervals, as an SVG chart.

harness.emit_csv(rows, "chain_demo.csv")
harness.emit_svg(rows, "chain_demo.svg", harness.PlotSpec(x="episode", title="chain, K=3000"))
