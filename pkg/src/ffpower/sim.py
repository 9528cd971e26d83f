"""Monte Carlo engine for battery-feedback policies.

Slot 1 starts with a full battery; arrivals ``E_2, E_3, ...`` are drawn
i.i.d. and added at the start of their slot. Each trial draws from its own
substream ``SeedSequence(seed, spawn_key=(trial,))``, so results do not
depend on the order or the number of workers the trials run on.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _backend
from .bounds import BoundReport, bound_report
from .core import (
    FEASIBILITY_RTOL,
    ArrivalModel,
    DomainError,
    EnergyCausalityError,
    SlotDecision,
    SystemParams,
)

Policy = Callable[[float], SlotDecision]


@dataclass(frozen=True)
class SimConfig:
    horizon: int = 100_000
    trials: int = 50
    seed: int = 0
    record_trace: bool = False
    burn_in: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise DomainError("horizon must be >= 1")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.burn_in < 0 or self.burn_in >= self.horizon:
            raise DomainError("burn_in must satisfy 0 <= burn_in < horizon")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class TraceRecord:
    slot: int
    arrival: float
    battery_before: float
    decision: SlotDecision
    consumed: float
    distortion: float


TRACE_COLUMNS = ("slot", "arrival", "battery_before", "theta", "power", "distortion")


@dataclass
class SimResult:
    mean_distortion: float
    std_error: float
    per_trial_means: list[float]
    trace: list[TraceRecord] | None = None

    @property
    def ci95_halfwidth(self) -> float:
        return 1.96 * self.std_error


def trace_to_csv(trace: Sequence[TraceRecord], fh=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for r in trace:
        writer.writerow([
            r.slot, f"{r.arrival:.9g}", f"{r.battery_before:.9g}",
            f"{r.decision.theta:.9g}", f"{r.decision.power:.9g}", f"{r.distortion:.9g}",
        ])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def draw_arrivals(model: ArrivalModel, horizon: int, rng: np.random.Generator) -> np.ndarray:
    """Arrivals for slots 2..horizon (slot 1 starts full)."""
    return np.ascontiguousarray(model.sample(rng, max(horizon - 1, 0)), dtype=np.float64)


def _python_loop(policy: Policy, arrivals, horizon, params, burn_in, record):
    """Slot loop for arbitrary callables; also the only path that records traces."""
    B = params.battery_capacity
    s, c, eps = params.sigma_s_sq, params.sigma_c_sq, params.sampling_cost
    tol = FEASIBILITY_RTOL * B
    consumed_fn = getattr(policy, "consumed", None)
    b = B
    consumed = 0.0
    total = 0.0
    trace = [] if record else None
    for t in range(horizon):
        arrival = B if t == 0 else float(arrivals[t - 1])
        if t > 0:
            b = b - consumed
            if b < 0.0:
                b = 0.0
            b = b + arrival
            if b > B:
                b = B
        decision = policy(b)
        theta, g = decision.theta, decision.power
        consumed = consumed_fn(b) if consumed_fn is not None else theta * (eps + g)
        if not 0.0 <= theta <= 1.0 or g < 0 or consumed > b + tol:
            raise EnergyCausalityError(
                f"slot {t + 1}: policy consumed {consumed!r} with battery {b!r}", slot=t + 1
            )
        d = (1.0 - theta) * s + theta * (s / (1.0 + g / c))
        if t >= burn_in:
            total = total + d
        if record:
            trace.append(TraceRecord(t + 1, arrival, b, decision, consumed, d))
    return total, trace


def simulate_arrivals(
    policy: Policy,
    arrivals: Sequence[float],
    params: SystemParams,
    horizon: int | None = None,
    burn_in: int = 0,
    record_trace: bool = False,
) -> tuple[float, list[TraceRecord] | None]:
    """Drive ``policy`` through a given arrival sequence for slots 2..horizon.

    Returns ``(average distortion over slots after burn_in, trace or None)``.
    """
    arrivals = np.ascontiguousarray(arrivals, dtype=np.float64)
    if horizon is None:
        horizon = len(arrivals) + 1
    if horizon < 1 or burn_in >= horizon:
        raise DomainError("need horizon >= 1 and burn_in < horizon")
    if len(arrivals) < horizon - 1:
        raise DomainError("need horizon - 1 arrivals")
    n = horizon - burn_in
    kernel_args = getattr(policy, "kernel_args", None)
    if record_trace or kernel_args is None:
        total, trace = _python_loop(policy, arrivals, horizon, params, burn_in, record_trace)
        return total / n, trace
    kind, q, tt, tp, step = kernel_args()
    total, bad = _backend.simulate(
        kind, q, tt, tp, step, arrivals, horizon, params.battery_capacity,
        params.sigma_s_sq, params.sigma_c_sq, params.sampling_cost, burn_in,
    )
    if bad >= 0:
        raise EnergyCausalityError(f"slot {bad + 1}: policy exceeded the battery level", slot=bad + 1)
    return total / n, None


def run_trial(
    policy: Policy,
    model: ArrivalModel,
    params: SystemParams,
    horizon: int,
    seed: int,
    trial: int = 0,
    burn_in: int = 0,
    record_trace: bool = False,
) -> tuple[float, list[TraceRecord] | None]:
    model.validate(params)
    arrivals = draw_arrivals(model, horizon, trial_rng(seed, trial))
    return simulate_arrivals(policy, arrivals, params, horizon, burn_in, record_trace)


def monte_carlo(
    policy: Policy,
    model: ArrivalModel,
    params: SystemParams,
    cfg: SimConfig,
    workers: int = 1,
) -> SimResult:
    """Replicate :func:`run_trial` ``cfg.trials`` times and aggregate.

    ``workers > 1`` runs trials on a thread pool (the compiled kernel releases
    the GIL). Output is identical for any ``workers``. Only trial 0 keeps its
    trace when ``cfg.record_trace`` is set.
    """
    model.validate(params)
    means = np.empty(cfg.trials)
    traces: list = [None] * cfg.trials

    def one(k: int) -> None:
        means[k], traces[k] = run_trial(
            policy, model, params, cfg.horizon, cfg.seed, trial=k,
            burn_in=cfg.burn_in, record_trace=cfg.record_trace and k == 0,
        )

    if workers > 1 and cfg.trials > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, range(cfg.trials)))
    else:
        for k in range(cfg.trials):
            one(k)

    mean = math.fsum(means) / cfg.trials
    if cfg.trials > 1:
        se = float(np.std(means, ddof=1)) / math.sqrt(cfg.trials)
    else:
        se = math.nan
    return SimResult(mean, se, means.tolist(), traces[0])


@dataclass
class SweepRow:
    battery_capacity: float
    params: SystemParams
    result: SimResult
    bounds: BoundReport
    extras: dict = field(default_factory=dict)


def sweep_battery(
    policy_factory: Callable[[ArrivalModel, SystemParams], Policy],
    model_factory: Callable[[float], ArrivalModel],
    params_base: SystemParams,
    B_values: Sequence[float],
    cfg: SimConfig,
    workers: int = 1,
) -> list[SweepRow]:
    """One Monte Carlo run per battery size, with bounds for ``q = mu / B`` attached."""
    B_values = [float(b) for b in B_values]
    if not B_values or any(b <= 0 for b in B_values):
        raise DomainError("B_values must be positive")
    if any(b2 <= b1 for b1, b2 in zip(B_values, B_values[1:])):
        raise DomainError("B_values must be strictly ascending")
    rows = []
    for B in B_values:
        params = params_base.with_capacity(B)
        model = model_factory(B)
        policy = policy_factory(model, params)
        result = monte_carlo(policy, model, params, cfg, workers=workers)
        rows.append(SweepRow(B, params, result, bound_report(model.fraction(B), params)))
    return rows
