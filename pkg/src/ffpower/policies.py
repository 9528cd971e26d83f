"""Power-control policies.

Fixed fraction policies spend ``q * b`` each slot, ``q = mu / B``. With a
sampling cost the slot budget is split between on-time and power by
:func:`single_slot_optimal`. :func:`dp_optimal_policy` gives the optimal
stationary baseline on a discretised battery.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .core import (
    FEASIBILITY_RTOL,
    ArrivalModel,
    BatteryLike,
    DomainError,
    SlotDecision,
    SystemParams,
    level_of,
)


class DegenerateCostError(DomainError):
    """The with-cost closed form needs a strictly positive sampling cost."""


class UnsupportedModelError(ValueError):
    """The DP solver only handles finite-support arrival models."""


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, span: float, iterations: int):
        super().__init__(message)
        self.span = span
        self.iterations = iterations


# --------------------------------------------------------------------------
# single-slot split
# --------------------------------------------------------------------------


def split_budget(budget, params: SystemParams):
    """Optimal ``(theta, power, distortion)`` for each slot budget, vectorised.

    For a budget ``e`` the sensor is on for ``min(e / (eps + r), 1)`` of the
    slot at power ``max(e - eps, r)``, with ``r = sqrt(eps * sigma_c_sq)``.
    Zero cost reduces to ``theta = 1, power = e``.
    """
    e = np.asarray(budget, dtype=float)
    if np.any(e < 0):
        raise DomainError("budget must be >= 0")
    s, c, eps = params.sigma_s_sq, params.sigma_c_sq, params.sampling_cost
    if eps == 0.0:
        theta = np.ones_like(e)
        g = e.copy()
    else:
        root = math.sqrt(eps * c)
        theta = np.minimum(e / (eps + root), 1.0)
        g = np.maximum(e - eps, root)
    value = (1.0 - theta) * s + theta * (s / (1.0 + g / c))
    return theta, g, value


def single_slot_optimal(budget: float, params: SystemParams) -> tuple[SlotDecision, float]:
    """Minimum distortion reachable in one slot with ``budget`` energy.

    Returns the decision and its distortion. The decision spends the whole
    budget: ``theta * (eps + power) == budget``.
    """
    if budget < 0:
        raise DomainError(f"budget must be >= 0, got {budget!r}")
    theta, g, value = split_budget(budget, params)
    return SlotDecision(float(theta), float(g)), float(value)


# --------------------------------------------------------------------------
# fixed fraction policies
# --------------------------------------------------------------------------


def _check_fraction(q: float) -> None:
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"fraction q must lie in [0, 1], got {q!r}")


def ffp_power(b: BatteryLike, q: float) -> float:
    _check_fraction(q)
    return q * level_of(b)


def ffp_with_cost(b: BatteryLike, q: float, params: SystemParams) -> SlotDecision:
    """On-fraction and power for the fixed fraction policy under a sampling cost."""
    _check_fraction(q)
    if params.sampling_cost <= 0:
        raise DegenerateCostError("ffp_with_cost needs sampling_cost > 0; use ffp_power")
    decision, _ = single_slot_optimal(q * level_of(b), params)
    return decision


def greedy_policy(b: BatteryLike) -> float:
    """Spend the whole battery."""
    return level_of(b)


class FixedFractionPolicy:
    """Stationary policy spending ``q * b`` per slot.

    Instances are callables ``level -> SlotDecision`` and also carry a kernel
    description so the simulator can run them in compiled code.
    """

    name = "ffp"

    def __init__(self, q: float, params: SystemParams):
        _check_fraction(q)
        self.q = float(q)
        self.params = params

    @classmethod
    def for_model(cls, model: ArrivalModel, params: SystemParams) -> "FixedFractionPolicy":
        return cls(model.fraction(params.battery_capacity), params)

    def __call__(self, level: float) -> SlotDecision:
        if self.params.sampling_cost == 0.0:
            return SlotDecision(1.0, ffp_power(level, self.q))
        return ffp_with_cost(level, self.q, self.params)

    def consumed(self, level: float) -> float:
        return self.q * level

    def kernel_args(self):
        empty = np.zeros(1)
        return _backend.KIND_FRACTION, self.q, empty, empty, 1.0

    def __repr__(self):
        return f"FixedFractionPolicy(q={self.q!r})"


class GreedyPolicy(FixedFractionPolicy):
    """Spend everything every slot (fraction 1)."""

    name = "greedy"

    def __init__(self, params: SystemParams):
        super().__init__(1.0, params)

    @classmethod
    def for_model(cls, model, params):
        return cls(params)

    def __call__(self, level):
        if self.params.sampling_cost == 0.0:
            return SlotDecision(1.0, greedy_policy(level))
        return single_slot_optimal(level, self.params)[0]

    def __repr__(self):
        return "GreedyPolicy()"


# --------------------------------------------------------------------------
# dynamic programming baseline
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PolicyTable:
    grid: np.ndarray
    theta: np.ndarray
    power: np.ndarray
    consumed: np.ndarray
    gain: float
    span: float = 0.0
    iterations: int = 0
    gain_bounds: tuple[float, float] = field(default=(float("nan"), float("nan")))

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def decisions(self) -> list[SlotDecision]:
        return [SlotDecision(float(t), float(g)) for t, g in zip(self.theta, self.power)]

    def index(self, level: float) -> int:
        i = int(math.floor(level / self.step + 1e-9))
        return min(max(i, 0), len(self.grid) - 1)

    def to_csv(self, fh=None) -> str:
        """Write ``battery_level, theta, power, consumed`` rows; return the text."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["battery_level", "theta", "power", "consumed"])
        for row in zip(self.grid, self.theta, self.power, self.consumed):
            writer.writerow([f"{float(x):.9g}" for x in row])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


class TablePolicy:
    """Look up a :class:`PolicyTable` at the largest grid level not above ``b``."""

    name = "dp"

    def __init__(self, table: PolicyTable, params: SystemParams):
        self.table = table
        self.params = params

    def __call__(self, level: float) -> SlotDecision:
        i = self.table.index(level)
        return SlotDecision(float(self.table.theta[i]), float(self.table.power[i]))

    def kernel_args(self):
        t = self.table
        return _backend.KIND_TABLE, 0.0, t.theta, t.power, t.step


def _arrival_transitions(model: ArrivalModel, step: float, last: int):
    values, probs = model.support()
    idx = np.clip(np.rint(np.asarray(values) / step).astype(np.int64), 0, last)
    agg: dict[int, float] = {}
    for i, p in zip(idx.tolist(), np.asarray(probs).tolist()):
        if p > 0:
            agg[i] = agg.get(i, 0.0) + p
    keys = sorted(agg)
    return np.array(keys, dtype=np.int64), np.array([agg[k] for k in keys])


def dp_optimal_policy(
    model: ArrivalModel,
    params: SystemParams,
    grid_size: int = 2000,
    span_tol: float = 1e-7,
    max_iter: int = 100_000,
) -> PolicyTable:
    """Relative value iteration on the battery-level MDP.

    The battery is discretised into ``grid_size`` uniformly spaced levels on
    ``[0, B]``. In state ``b_i`` the action is a consumption ``c_j <= b_i`` on
    the grid; its stage cost is the single-slot optimum for budget ``c_j``.
    Arrivals are projected to the nearest grid level. Iteration stops once the
    span of ``T h - h`` drops below ``span_tol``; the reported gain is the
    midpoint of its min and max, which bracket the optimal average cost of
    the discretised MDP.
    """
    if not model.finite_support:
        raise UnsupportedModelError(
            f"dp_optimal_policy needs a finite-support arrival model, got {type(model).__name__}"
        )
    if grid_size < 2:
        raise DomainError(f"grid_size must be >= 2, got {grid_size!r}")
    model.validate(params)
    B = params.battery_capacity
    last = grid_size - 1
    grid = np.linspace(0.0, B, grid_size)
    step = B / last
    cost = split_budget(grid, params)[2]
    jumps, probs = _arrival_transitions(model, step, last)
    m = np.arange(grid_size)
    nxt = [np.minimum(m + a, last) for a in jumps]

    h = np.zeros(grid_size)
    span = math.inf
    lo = hi = math.nan
    arg = np.zeros(grid_size, dtype=np.int64)
    for it in range(1, max_iter + 1):
        w = np.zeros(grid_size)
        for p, idx in zip(probs, nxt):
            w += p * h[idx]
        th, arg = _backend.bellman(cost, w)
        diff = th - h
        lo, hi = float(diff.min()), float(diff.max())
        span = hi - lo
        h = th - th[last]
        if span < span_tol:
            break
    else:
        raise ConvergenceError(
            f"relative value iteration did not converge in {max_iter} iterations "
            f"(final span {span:.3g})",
            span,
            max_iter,
        )

    consumed = grid[arg]
    theta, power, _ = split_budget(consumed, params)
    # keep table decisions feasible at their own grid level
    assert np.all(theta * (params.sampling_cost + power) <= grid + FEASIBILITY_RTOL * B + 1e-12)
    return PolicyTable(
        grid=grid,
        theta=theta,
        power=power,
        consumed=consumed,
        gain=0.5 * (lo + hi),
        span=span,
        iterations=it,
        gain_bounds=(lo, hi),
    )
