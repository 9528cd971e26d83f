"""Quick invariant suites behind ``ffpower verify``.

Each suite returns a :class:`SuiteResult` with the observed worst case and
the allowed limit. Horizons are kept short so the whole run takes seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bounds import (
    bernoulli_renewal_ffp_with_cost,
    bound_report,
    lower_bound_with_cost,
)
from .config import ExperimentConfig
from .core import Bernoulli, SystemParams, slot_distortion, step_battery
from .policies import FixedFractionPolicy, dp_optimal_policy, split_budget
from .sim import SimConfig, monte_carlo, simulate_arrivals


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    observed: float
    allowed: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{status}  {self.name:<24} observed={self.observed:.6g}  allowed={self.allowed:.6g}{extra}"


def grid_search_split(budget: float, params: SystemParams, step: float = 1e-5) -> float:
    """Brute-force single-slot optimum over the on-fraction, power from the budget."""
    s, c, eps = params.sigma_s_sq, params.sigma_c_sq, params.sampling_cost
    top = 1.0 if eps == 0 else min(1.0, budget / eps)
    theta = np.append(np.arange(0.0, top, step), top)
    theta = theta[theta > 0]
    gbar = np.maximum(budget - theta * eps, 0.0)
    vals = (1 - theta) * s + theta * s / (1 + gbar / (theta * c))
    return float(min(vals.min(), s))


def suite_battery(cfg: ExperimentConfig, rng: np.random.Generator) -> SuiteResult:
    B = cfg.params.battery_capacity
    worst = 0.0
    for _ in range(2000):
        b = rng.uniform(0, B)
        nxt = step_battery(b, rng.uniform(0, b), rng.uniform(0, B), cfg.params).level
        worst = max(worst, -nxt, nxt - B)
    return SuiteResult("battery_in_range", worst <= 0.0, worst, 0.0)


def suite_distortion(cfg: ExperimentConfig, rng: np.random.Generator) -> SuiteResult:
    params = cfg.params
    worst = -math.inf
    for _ in range(2000):
        g1, g2 = np.sort(rng.uniform(0, 20, 2))
        if g1 == g2:
            continue
        mono = slot_distortion(g2, params) - slot_distortion(g1, params)
        mid = slot_distortion(0.5 * (g1 + g2), params)
        conv = mid - 0.5 * (slot_distortion(g1, params) + slot_distortion(g2, params))
        worst = max(worst, mono, conv - 1e-12)
    return SuiteResult("distortion_decr_convex", worst < 0.0, worst, 0.0)


def suite_closed_form(cfg: ExperimentConfig, rng: np.random.Generator) -> SuiteResult:
    worst = 0.0
    for _ in range(20):
        params = SystemParams(cfg.sigma_s_sq, rng.uniform(0.2, 5), 1.0, rng.uniform(0.05, 5))
        budget = rng.uniform(0, 10)
        value = float(split_budget(budget, params)[2])
        worst = max(worst, abs(value - grid_search_split(budget, params)))
    return SuiteResult("closed_form_vs_grid", worst <= 1e-6, worst, 1e-6)


def suite_convexity(cfg: ExperimentConfig, rng: np.random.Generator) -> SuiteResult:
    mu = np.linspace(0, 10, 1000)
    worst = -math.inf
    for eps in (0.0, 0.1, 1.0, 1.5, 10.0):
        f = split_budget(mu, cfg.params.with_cost(eps))[2]
        d1 = np.diff(f)
        d2 = np.diff(f, 2)
        worst = max(worst, d1.max(), (-d2).max() - 1e-9)
    return SuiteResult("lower_bound_convexity", worst <= 0.0, worst, 0.0)


def suite_sandwich(cfg: ExperimentConfig, rng: np.random.Generator) -> SuiteResult:
    worst_gap = -math.inf
    worst_low = -math.inf
    for B in cfg.batteries:
        params = cfg.params.with_capacity(B)
        report = bound_report(cfg.model(B).fraction(B), params, cfg.tail_tol)
        worst_gap = max(worst_gap, report.renewal_value - report.lower)
        worst_low = max(worst_low, report.lower - report.renewal_value)
    ok = worst_gap <= cfg.allowed_gap and worst_low <= 1e-12
    return SuiteResult("theorem_sandwich", ok, worst_gap, cfg.allowed_gap,
                       f"lower-violation={worst_low:.3g}")


def suite_renewal_mc(cfg: ExperimentConfig, rng: np.random.Generator) -> SuiteResult:
    worst = 0.0
    sim = SimConfig(horizon=50_000, trials=10, seed=cfg.seed)
    for p in (0.1, 0.5, 0.9):
        params = cfg.params.with_capacity(2.0)
        model = Bernoulli(p, 2.0)
        res = monte_carlo(FixedFractionPolicy(p, params), model, params, sim)
        series = bernoulli_renewal_ffp_with_cost(p, params, cfg.tail_tol)
        worst = max(worst, abs(res.mean_distortion - series) / res.std_error)
    return SuiteResult("renewal_vs_monte_carlo", worst <= 3.0, worst, 3.0, "in standard errors")


def suite_dp(cfg: ExperimentConfig, rng: np.random.Generator) -> SuiteResult:
    params = cfg.params.with_capacity(2.0)
    model = Bernoulli(0.5, 2.0)
    table = dp_optimal_policy(model, params, grid_size=400, span_tol=cfg.span_tol)
    lower = lower_bound_with_cost(1.0, params)
    upper = bernoulli_renewal_ffp_with_cost(0.5, params)
    slack = max(lower - table.gain, table.gain - upper)
    return SuiteResult("dp_within_bounds", slack <= 1e-3, slack, 1e-3)


def suite_determinism(cfg: ExperimentConfig, rng: np.random.Generator) -> SuiteResult:
    params = cfg.params.with_capacity(2.0)
    model = Bernoulli(0.5, 2.0)
    policy = FixedFractionPolicy(0.5, params)
    sim = SimConfig(horizon=20_000, trials=8, seed=cfg.seed)
    a = monte_carlo(policy, model, params, sim)
    b = monte_carlo(policy, model, params, sim, workers=4)
    diff = max(abs(x - y) for x, y in zip(a.per_trial_means, b.per_trial_means))
    return SuiteResult("determinism", diff == 0.0, diff, 0.0)


def suite_structure(cfg: ExperimentConfig, rng: np.random.Generator) -> SuiteResult:
    params = SystemParams(cfg.sigma_s_sq, cfg.sigma_c_sq, 40.0, 1.5)
    policy = FixedFractionPolicy(0.2, params)
    _, trace = simulate_arrivals(policy, np.zeros(40), params, record_trace=True)
    switches = count_regime_switches(trace, params)
    return SuiteResult("single_arrival_structure", switches == 1, switches, 1)


def count_regime_switches(trace, params: SystemParams) -> int:
    """Number of changes between the 'theta = 1, power falling' and
    'power fixed, theta falling' regimes; -1 if any slot fits neither."""
    root = math.sqrt(params.sampling_cost * params.sigma_c_sq)
    regimes = []
    for prev, cur in zip(trace, trace[1:]):
        if cur.decision.theta == 1.0 and cur.decision.power < prev.decision.power:
            regimes.append(0)
        elif cur.decision.power == root and cur.decision.theta < prev.decision.theta:
            regimes.append(1)
        else:
            return -1
    first = trace[0].decision
    regimes.insert(0, 0 if first.theta == 1.0 else 1)
    return sum(1 for a, b in zip(regimes, regimes[1:]) if a != b)


SUITES: list[Callable[[ExperimentConfig, np.random.Generator], SuiteResult]] = [
    suite_battery,
    suite_distortion,
    suite_closed_form,
    suite_convexity,
    suite_sandwich,
    suite_renewal_mc,
    suite_dp,
    suite_determinism,
    suite_structure,
]


def run_all(cfg: ExperimentConfig) -> list[SuiteResult]:
    rng = np.random.default_rng(cfg.seed)
    return [suite(cfg, rng) for suite in SUITES]
