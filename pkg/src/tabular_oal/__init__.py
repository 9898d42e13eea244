"""Tabular online apprenticeship learning: exact DP, the optimistic mirror-descent learner, and regret evaluation."""
from .mdp_core import (
    TabularMdp,
    ValueTables,
    evaluate,
    inner_product,
    load_mdp,
    occupancy,
    sample_trajectory,
    save_mdp,
    value_difference_residual,
)
from .expert import bc_policy, collect_expert_data, empirical_occupancy
from .model import VisitCounters, estimate_dynamics, record_trajectory, ucb_bonus, warm_start_from_expert
from .oal import OalConfig, OalState, RunLog, run, run_batch, run_episode, replay
from .evaluation import CumulativeGap, RegretCurve, accumulate, al_regret, build_curve
from .envs import ChainSpec, fifty_start_mdp, stochastic_chain

__version__ = "0.1.0"
