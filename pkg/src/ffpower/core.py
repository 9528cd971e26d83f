"""Domain types, battery dynamics and per-slot distortion.

Rates use the natural logarithm, so a slot transmitted at power ``g`` has
rate ``0.5 * ln(1 + g / sigma_c_sq)`` and distortion
``sigma_s_sq * exp(-2 * rate) = sigma_s_sq / (1 + g / sigma_c_sq)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

# consumed may exceed the battery by this fraction of B before we call it a bug
FEASIBILITY_RTOL = 1e-9
PROB_ATOL = 1e-12


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class EnergyCausalityError(RuntimeError):
    """A policy tried to spend more energy than the battery holds."""

    def __init__(self, message: str, slot: int | None = None):
        super().__init__(message)
        self.slot = slot


@dataclass(frozen=True)
class SystemParams:
    sigma_s_sq: float = 1.0
    sigma_c_sq: float = 1.0
    battery_capacity: float = 1.0
    sampling_cost: float = 0.0

    def __post_init__(self):
        for name in ("sigma_s_sq", "sigma_c_sq", "battery_capacity"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")
        if not (math.isfinite(self.sampling_cost) and self.sampling_cost >= 0):
            raise DomainError(f"sampling_cost must be >= 0, got {self.sampling_cost!r}")

    @property
    def B(self) -> float:
        return self.battery_capacity

    @property
    def eps(self) -> float:
        return self.sampling_cost

    def with_capacity(self, battery_capacity: float) -> "SystemParams":
        return SystemParams(self.sigma_s_sq, self.sigma_c_sq, battery_capacity, self.sampling_cost)

    def with_cost(self, sampling_cost: float) -> "SystemParams":
        return SystemParams(self.sigma_s_sq, self.sigma_c_sq, self.battery_capacity, sampling_cost)


@dataclass(frozen=True)
class SlotDecision:
    theta: float
    power: float

    def consumed(self, sampling_cost: float) -> float:
        """Energy drawn from the battery in the slot."""
        return self.theta * (sampling_cost + self.power)


@dataclass(frozen=True)
class BatteryState:
    level: float

    def __float__(self) -> float:
        return float(self.level)


BatteryLike = Union[BatteryState, float]


def level_of(b: BatteryLike) -> float:
    return b.level if isinstance(b, BatteryState) else float(b)


# --------------------------------------------------------------------------
# arrival models
# --------------------------------------------------------------------------


class ArrivalModel:
    """I.i.d. harvest distribution. Subclasses provide ``mean`` and ``sample``."""

    finite_support = False

    @property
    def mean(self) -> float:
        raise NotImplementedError

    def fraction(self, battery_capacity: float) -> float:
        """q = mu / B."""
        return self.mean / battery_capacity

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(values, probs)`` for finite-support models."""
        raise DomainError(f"{type(self).__name__} has no finite support")

    def validate(self, params: SystemParams) -> None:
        raise NotImplementedError


def _check_max(hi: float, params: SystemParams) -> None:
    if hi > params.battery_capacity * (1 + FEASIBILITY_RTOL):
        raise DomainError(
            f"arrival value {hi!r} exceeds battery capacity {params.battery_capacity!r}"
        )


@dataclass(frozen=True)
class Bernoulli(ArrivalModel):
    """``magnitude`` with probability ``p``, else nothing."""

    p: float
    magnitude: float

    finite_support = True

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {self.p!r}")
        if self.magnitude < 0:
            raise DomainError(f"magnitude must be >= 0, got {self.magnitude!r}")

    @property
    def mean(self) -> float:
        return self.p * self.magnitude

    def sample(self, rng, size):
        return np.where(rng.random(size) < self.p, self.magnitude, 0.0)

    def support(self):
        return np.array([0.0, self.magnitude]), np.array([1.0 - self.p, self.p])

    def validate(self, params):
        _check_max(self.magnitude, params)


@dataclass(frozen=True)
class FiniteSupport(ArrivalModel):
    values: tuple[float, ...]
    probs: tuple[float, ...]

    finite_support = True

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if len(self.values) == 0 or len(self.values) != len(self.probs):
            raise DomainError("values and probs must be non-empty and of equal length")
        if min(self.values) < 0:
            raise DomainError("arrival values must be >= 0")
        if min(self.probs) < 0 or abs(math.fsum(self.probs) - 1.0) > PROB_ATOL:
            raise DomainError(f"probs must be non-negative and sum to 1, got {self.probs!r}")

    @classmethod
    def uniform(cls, values: Sequence[float]) -> "FiniteSupport":
        n = len(values)
        return cls(tuple(values), tuple([1.0 / n] * n))

    @property
    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.values, self.probs))

    def sample(self, rng, size):
        values = np.asarray(self.values)
        cdf = np.cumsum(self.probs)
        idx = np.searchsorted(cdf, rng.random(size) * cdf[-1], side="right")
        return values[np.minimum(idx, len(values) - 1)]

    def support(self):
        return np.asarray(self.values), np.asarray(self.probs)

    def validate(self, params):
        _check_max(max(self.values), params)


@dataclass(frozen=True)
class Sampler(ArrivalModel):
    """Continuous harvest distribution on ``[low, high]``.

    ``draw(rng, size)`` must return an array of arrivals; ``mean_value`` is the
    exact mean of that distribution.
    """

    draw: Callable[[np.random.Generator, int], np.ndarray]
    mean_value: float
    low: float
    high: float
    name: str = "sampler"

    @classmethod
    def uniform(cls, low: float, high: float) -> "Sampler":
        if not 0 <= low <= high:
            raise DomainError(f"need 0 <= low <= high, got ({low!r}, {high!r})")

        def draw(rng, size):
            return rng.uniform(low, high, size)

        return cls(draw, 0.5 * (low + high), low, high, name="uniform")

    @classmethod
    def beta(cls, a: float, b: float, scale: float) -> "Sampler":
        def draw(rng, size):
            return scale * rng.beta(a, b, size)

        return cls(draw, scale * a / (a + b), 0.0, scale, name="beta")

    @property
    def mean(self) -> float:
        return self.mean_value

    def sample(self, rng, size):
        return np.asarray(self.draw(rng, size), dtype=float)

    def validate(self, params):
        if self.low < 0:
            raise DomainError("arrival support must be non-negative")
        _check_max(self.high, params)


# --------------------------------------------------------------------------
# dynamics and distortion
# --------------------------------------------------------------------------


def step_battery(b: BatteryLike, consumed: float, arrival: float, params: SystemParams) -> BatteryState:
    """Next battery state ``min(b - consumed + arrival, B)``."""
    level = level_of(b)
    B = params.battery_capacity
    if consumed < 0:
        raise DomainError(f"consumed energy must be >= 0, got {consumed!r}")
    if arrival < 0 or arrival > B * (1 + FEASIBILITY_RTOL):
        raise DomainError(f"arrival must lie in [0, B={B}], got {arrival!r}")
    if consumed > level + FEASIBILITY_RTOL * B:
        raise EnergyCausalityError(
            f"consumed {consumed!r} exceeds battery level {level!r}"
        )
    return BatteryState(min(max(level - consumed, 0.0) + arrival, B))


def slot_distortion(g: float, params: SystemParams) -> float:
    if g < 0:
        raise DomainError(f"power must be >= 0, got {g!r}")
    return params.sigma_s_sq / (1.0 + g / params.sigma_c_sq)


def slot_distortion_with_cost(d: SlotDecision, params: SystemParams) -> float:
    """Time-shared distortion: off for ``1 - theta`` of the slot, on at power ``d.power``."""
    if not 0.0 <= d.theta <= 1.0:
        raise DomainError(f"theta must lie in [0, 1], got {d.theta!r}")
    return (1.0 - d.theta) * params.sigma_s_sq + d.theta * slot_distortion(d.power, params)


def rate(g: float, params: SystemParams) -> float:
    """Channel rate in nats at power ``g``."""
    return 0.5 * math.log1p(g / params.sigma_c_sq)


def distortion_from_rate(r: float, params: SystemParams) -> float:
    return params.sigma_s_sq * math.exp(-2.0 * r)
