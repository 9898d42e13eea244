"""Oracle cross-checks runnable from the command line.

Each check compares a fast routine against an independent slow computation on
seeded random instances and reports the worst discrepancy.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .envs import ChainSpec, fifty_start_mdp, stochastic_chain
from .evaluation import al_regret, al_regret_bruteforce, build_curve
from .mdp_core import TabularMdp, evaluate, inner_product, occupancy, value_difference_residual
from .oal import OalConfig, replay


@dataclass
class CheckResult:
    name: str
    cases: int
    worst: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.worst <= self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.cases} cases, max error {self.worst:.3e} (tol {self.tol:g})"


def _random_instance(rng, H, S, A):
    def simplex(shape):
        x = rng.random(shape) + 1e-3
        return x / x.sum(-1, keepdims=True)

    return TabularMdp(simplex(S), simplex((H, S, A, S))), simplex((H, S, A))


def enumerate_occupancy(mdp: TabularMdp, policy: np.ndarray) -> np.ndarray:
    """Occupancy by summing the probability of every state-action path."""
    H, S, A = mdp.shape
    p, mu = mdp.dynamics, mdp.initial_dist
    d = np.zeros((H, S, A))
    for path in itertools.product(range(S * A), repeat=H):
        prob = mu[path[0] // A]
        for h, sa in enumerate(path):
            s, a = divmod(sa, A)
            if h > 0:
                ps, pa = divmod(path[h - 1], A)
                prob *= p[h - 1, ps, pa, s]
            prob *= policy[h, s, a]
            if prob == 0.0:
                break
        else:
            for h, sa in enumerate(path):
                s, a = divmod(sa, A)
                d[h, s, a] += prob
    return d


def check_occupancy(cases=200, seed=0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        H, S, A = (int(x) for x in rng.integers(1, 4, size=3))
        while (S * A) ** H > 10**4:
            H -= 1
        mdp, pi = _random_instance(rng, H, S, A)
        worst = max(worst, float(np.abs(occupancy(mdp, pi) - enumerate_occupancy(mdp, pi)).max()))
    return CheckResult("occupancy vs path enumeration", cases, worst, 1e-12)


def check_duality(cases=200, seed=1) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        H, S, A = (int(x) for x in rng.integers(1, 7, size=3))
        mdp, pi = _random_instance(rng, H, S, A)
        c = rng.random((H, S, A))
        V, _ = evaluate(mdp, c, pi)
        worst = max(worst, abs(inner_product(c, occupancy(mdp, pi)) - float(mdp.initial_dist @ V[0])))
    return CheckResult("cost-occupancy duality", cases, worst, 1e-10)


def check_regret(cases=200, seed=2) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        H, S, A = (int(x) for x in rng.integers(1, 4, size=3))
        while H * S * A > 12:
            H, S, A = (int(x) for x in rng.integers(1, 4, size=3))
        g = rng.normal(size=(H, S, A)) * rng.choice([0.01, 1.0, 100.0])
        worst = max(worst, abs(float(al_regret(g)) - al_regret_bruteforce(g)))
    return CheckResult("regret vs cost-box vertices", cases, worst, 1e-12)


def check_value_difference(cases=100, seed=3) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        H, S, A = (int(x) for x in rng.integers(1, 6, size=3))
        m1, pi1 = _random_instance(rng, H, S, A)
        m2, pi2 = _random_instance(rng, H, S, A)
        m2 = TabularMdp(m1.initial_dist, m2.dynamics)
        res = value_difference_residual(m1, rng.random((H, S, A)), m2, rng.random((H, S, A)), pi1, pi2)
        worst = max(worst, res)
    return CheckResult("value difference decomposition", cases, worst, 1e-8)


def check_expert_replay() -> CheckResult:
    worst = 0.0
    envs = [stochastic_chain(ChainSpec(32, 0.2)), stochastic_chain(ChainSpec(8, 0.0)), fifty_start_mdp()]
    for mdp, expert in envs:
        log = replay(mdp, expert, OalConfig(K=1000, eval_every=100), reference=occupancy(mdp, expert))
        worst = max(worst, float(np.max(build_curve(log, mdp, expert).regret)))
    return CheckResult("expert replay has zero regret", len(envs), worst, 0.0)


CHECKS = (check_occupancy, check_duality, check_regret, check_value_difference, check_expert_replay)


def run_selftest(echo=print) -> bool:
    ok = True
    for check in CHECKS:
        result = check()
        echo(result.line())
        ok &= result.passed
    return ok
