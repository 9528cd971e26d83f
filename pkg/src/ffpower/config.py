"""Experiment configuration: flat ``key = value`` text plus overrides.

Lists are comma separated. Arrival support values (``support``, ``low``,
``high``) are fractions of the battery size, so one config describes a
whole battery sweep. Bernoulli arrivals always have magnitude ``B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Iterable

import numpy as np

from .core import ArrivalModel, Bernoulli, FiniteSupport, Sampler, SystemParams
from .sim import SimConfig

ARRIVAL_KINDS = ("bernoulli", "finite", "uniform")
POLICY_NAMES = ("ffp", "greedy", "dp")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _names(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    return str(value)


@dataclass(frozen=True)
class ExperimentConfig:
    sigma_s_sq: float = 1.0
    sigma_c_sq: float = 1.0
    battery_capacity: float = 2.0
    sampling_cost: float = 0.0
    arrivals: str = "bernoulli"
    p: float = 0.5
    support: tuple[float, ...] = (0.0, 0.5, 1.0)
    probs: tuple[float, ...] = ()
    low: float = 0.0
    high: float = 1.0
    horizon: int = 100_000
    trials: int = 50
    seed: int = 0
    burn_in: int = 0
    record_trace: bool = False
    B_values: tuple[float, ...] = ()
    policies: tuple[str, ...] = ("ffp",)
    grid_size: int = 2000
    span_tol: float = 1e-7
    tail_tol: float = 1e-12
    gap_tolerance: float = 0.5  # in units of sigma_s_sq
    workers: int = 1
    out: str = "-"
    format: str = "csv"

    # ---------------------------------------------------------------- parsing

    @classmethod
    def from_mapping(cls, items: dict[str, str], base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        base = base or cls()
        types = {f.name: f.type for f in fields(cls)}
        updates = {}
        for key, raw in items.items():
            key = key.strip()
            if key not in types:
                raise ConfigError(key, "unknown configuration key")
            kind = types[key]
            try:
                if kind == "float":
                    updates[key] = float(raw)
                elif kind == "int":
                    updates[key] = int(raw)
                elif kind == "bool":
                    updates[key] = _bool(raw)
                elif kind == "tuple[float, ...]":
                    updates[key] = _floats(raw)
                elif kind == "tuple[str, ...]":
                    updates[key] = _names(raw)
                else:
                    updates[key] = raw.strip()
            except ValueError as exc:
                raise ConfigError(key, f"cannot parse {raw!r} ({exc})") from None
        return replace(base, **updates)

    @classmethod
    def parse(cls, text: str, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        return cls.from_mapping(parse_pairs(text.splitlines()), base)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {_fmt(value)}")
        return "\n".join(lines) + "\n"

    # ------------------------------------------------------------- validation

    def validate(self) -> "ExperimentConfig":
        for name in ("sigma_s_sq", "sigma_c_sq", "battery_capacity"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(name, f"must be a positive number, got {v!r}")
        if not (math.isfinite(self.sampling_cost) and self.sampling_cost >= 0):
            raise ConfigError("sampling_cost", f"must be >= 0, got {self.sampling_cost!r}")
        if self.arrivals not in ARRIVAL_KINDS:
            raise ConfigError("arrivals", f"must be one of {ARRIVAL_KINDS}, got {self.arrivals!r}")
        if self.arrivals == "bernoulli" and not 0 <= self.p <= 1:
            raise ConfigError("p", f"must lie in [0, 1], got {self.p!r}")
        if self.arrivals == "finite":
            if not self.support or any(not 0 <= v <= 1 for v in self.support):
                raise ConfigError("support", "fractions of B in [0, 1] required")
            if self.probs:
                if len(self.probs) != len(self.support):
                    raise ConfigError("probs", "must match support in length")
                if any(x < 0 for x in self.probs) or abs(math.fsum(self.probs) - 1) > 1e-12:
                    raise ConfigError("probs", "must be non-negative and sum to 1")
        if self.arrivals == "uniform" and not 0 <= self.low <= self.high <= 1:
            raise ConfigError("low", "need 0 <= low <= high <= 1 (fractions of B)")
        if self.horizon < 1:
            raise ConfigError("horizon", "must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        if not 0 <= self.burn_in < self.horizon:
            raise ConfigError("burn_in", "must satisfy 0 <= burn_in < horizon")
        if any(b <= 0 for b in self.B_values) or any(
            b2 <= b1 for b1, b2 in zip(self.B_values, self.B_values[1:])
        ):
            raise ConfigError("B_values", "must be positive and strictly ascending")
        if not self.policies:
            raise ConfigError("policies", "select at least one policy")
        for name in self.policies:
            if name not in POLICY_NAMES:
                raise ConfigError("policies", f"unknown policy {name!r}; choose from {POLICY_NAMES}")
        if "dp" in self.policies and self.arrivals == "uniform":
            raise ConfigError("policies", "dp needs finite-support arrivals, not uniform")
        if self.grid_size < 2:
            raise ConfigError("grid_size", "must be >= 2")
        if not self.span_tol > 0:
            raise ConfigError("span_tol", "must be > 0")
        if not self.tail_tol > 0:
            raise ConfigError("tail_tol", "must be > 0")
        if not self.gap_tolerance >= 0:
            raise ConfigError("gap_tolerance", "must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        if self.format != "csv":
            raise ConfigError("format", f"only csv is supported, got {self.format!r}")
        return self

    # ----------------------------------------------------------- derived objects

    @property
    def params(self) -> SystemParams:
        return SystemParams(self.sigma_s_sq, self.sigma_c_sq, self.battery_capacity, self.sampling_cost)

    @property
    def sim(self) -> SimConfig:
        return SimConfig(self.horizon, self.trials, self.seed, self.record_trace, self.burn_in)

    @property
    def batteries(self) -> tuple[float, ...]:
        return self.B_values or (self.battery_capacity,)

    @property
    def allowed_gap(self) -> float:
        return self.gap_tolerance * self.sigma_s_sq

    def model(self, B: float) -> ArrivalModel:
        if self.arrivals == "bernoulli":
            return Bernoulli(self.p, B)
        if self.arrivals == "finite":
            values = tuple(v * B for v in self.support)
            if self.probs:
                return FiniteSupport(values, self.probs)
            return FiniteSupport.uniform(values)
        return Sampler.uniform(self.low * B, self.high * B)


def parse_pairs(lines: Iterable[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}", f"expected key = value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _log_grid(lo: float, hi: float, n: int) -> tuple[float, ...]:
    return tuple(float(x) for x in np.geomspace(lo, hi, n))


PRESETS: dict[str, dict] = {
    "fig1": dict(
        sigma_s_sq=1.0, sigma_c_sq=1.0, sampling_cost=0.0, arrivals="bernoulli", p=0.5,
        B_values=_log_grid(0.25, 10.0, 15), horizon=100_000, trials=50,
        policies=("ffp", "dp"),
    ),
    "fig2": dict(
        sigma_s_sq=1.0, sigma_c_sq=1.0, sampling_cost=1.5, arrivals="bernoulli", p=0.5,
        B_values=_log_grid(0.25, 10.0, 15), horizon=100_000, trials=50,
        policies=("ffp", "dp"),
    ),
}


def preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return replace(ExperimentConfig(), **PRESETS[name])
