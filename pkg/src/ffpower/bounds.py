"""Lower bounds and exact fixed-fraction values under Bernoulli arrivals.

Under Bernoulli arrivals of size ``B`` every arrival refills the battery, so
the long-run average distortion of the fixed fraction policy is a renewal
average over one geometric inter-arrival cycle::

    p * sum_{t>=1} (1-p)^(t-1) * f_eps((1-p)^(t-1) * mu)

which is evaluated here by truncated summation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import DomainError, SystemParams
from .policies import split_budget

DEFAULT_TAIL_TOL = 1e-12


@dataclass(frozen=True)
class BoundReport:
    battery_capacity: float
    sampling_cost: float
    mu: float
    q: float
    lower: float
    renewal_value: float
    bern_gap_term: float
    gap_bound: float

    CSV_COLUMNS = (
        "B", "epsilon", "mu", "q", "lower_bound", "renewal_value", "bern_gap_term", "gap_bound",
    )

    def csv_row(self) -> list[float]:
        return [
            self.battery_capacity, self.sampling_cost, self.mu, self.q,
            self.lower, self.renewal_value, self.bern_gap_term, self.gap_bound,
        ]

    def sandwich_ok(self, gap: float | None = None, atol: float = 1e-12) -> bool:
        gap = self.gap_bound if gap is None else gap
        return self.lower - atol <= self.renewal_value <= self.lower + gap + atol


def lower_bound_no_cost(mu: float, params: SystemParams) -> float:
    """``sigma_s^2 / (1 + mu / sigma_c^2)``: distortion of spending the mean every slot."""
    if mu < 0:
        raise DomainError(f"mu must be >= 0, got {mu!r}")
    return params.sigma_s_sq / (1.0 + mu / params.sigma_c_sq)


def lower_bound_with_cost(mu: float, params: SystemParams) -> float:
    if mu < 0:
        raise DomainError(f"mu must be >= 0, got {mu!r}")
    if params.sampling_cost == 0.0:
        return lower_bound_no_cost(mu, params)
    return float(split_budget(mu, params)[2])


def lower_bound(mu: float, params: SystemParams) -> float:
    """Lower bound for whichever problem ``params`` describes."""
    return lower_bound_with_cost(mu, params)


def _series_terms(p: float, sigma_s_sq: float, tail_tol: float) -> int:
    if p >= 1.0:
        return 1
    # smallest T with sigma_s^2 (1-p)^T / p < tail_tol
    T = math.log(tail_tol * p / sigma_s_sq) / math.log1p(-p)
    return max(1, int(math.floor(T)) + 1)


def _renewal(p: float, params: SystemParams, tail_tol: float, f) -> float:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    if tail_tol <= 0:
        raise DomainError("tail_tol must be > 0")
    if p == 0.0:
        warnings.warn("p = 0: no energy ever arrives; distortion is sigma_s^2", RuntimeWarning)
        return params.sigma_s_sq
    mu = p * params.battery_capacity
    T = _series_terms(p, params.sigma_s_sq, tail_tol)
    decay = np.power(1.0 - p, np.arange(T))
    return float(p * math.fsum(decay * f(decay * mu)))


def bernoulli_renewal_ffp(p: float, params: SystemParams, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """Long-run FFP distortion without sampling cost, Bernoulli(p) arrivals of size B."""
    s, c = params.sigma_s_sq, params.sigma_c_sq
    return _renewal(p, params, tail_tol, lambda g: s / (1.0 + g / c))


def bernoulli_renewal_ffp_with_cost(
    p: float, params: SystemParams, tail_tol: float = DEFAULT_TAIL_TOL
) -> float:
    """As :func:`bernoulli_renewal_ffp` but each slot pays the sampling cost.

    Slot ``t`` of a cycle has budget ``(1-p)^(t-1) * mu`` and achieves the
    single-slot optimum for it.
    """
    if params.sampling_cost == 0.0:
        return bernoulli_renewal_ffp(p, params, tail_tol)
    return _renewal(p, params, tail_tol, lambda e: split_budget(e, params)[2])


def gap_terms(p: float, params: SystemParams) -> tuple[float, float]:
    """``(sigma_s^2 (1-p)/(2-p), sigma_s^2 / 2)``.

    The first term is the Bernoulli-specific gap above the lower bound, the
    second its supremum over ``p``.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    return params.sigma_s_sq * (1.0 - p) / (2.0 - p), 0.5 * params.sigma_s_sq


def bound_report(q: float, params: SystemParams, tail_tol: float = DEFAULT_TAIL_TOL) -> BoundReport:
    """All bounds for fraction ``q``.

    The renewal value is that of Bernoulli(q) arrivals of size B, which upper
    bounds the FFP for any i.i.d. arrivals with the same mean.
    """
    B = params.battery_capacity
    mu = q * B
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        renewal = bernoulli_renewal_ffp_with_cost(q, params, tail_tol)
    bern, gap = gap_terms(q, params)
    return BoundReport(
        battery_capacity=B,
        sampling_cost=params.sampling_cost,
        mu=mu,
        q=q,
        lower=lower_bound_with_cost(mu, params),
        renewal_value=renewal,
        bern_gap_term=bern,
        gap_bound=gap,
    )
