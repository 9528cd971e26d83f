import warnings

import numpy as np
import pytest

from ffpower.bounds import (
    bernoulli_renewal_ffp,
    bernoulli_renewal_ffp_with_cost,
    bound_report,
    gap_terms,
    lower_bound_no_cost,
    lower_bound_with_cost,
)
from ffpower.core import DomainError, SystemParams
from ffpower.policies import split_budget

from oracles import cycle_average, grid_single_slot

# frozen from oracles.cycle_average (5000-term direct sum over cycle positions)
RENEWAL_B2 = {0.1: 0.9075035203111971, 0.5: 0.6322498901742221, 0.9: 0.40753898885937073}
# frozen from oracles.cycle_average with grid_single_slot(step 1e-6) per slot, p=0.5, B=4, eps=1.5
RENEWAL_COST_B4 = 0.7306119615112379


def unit(B=2.0, eps=0.0):
    return SystemParams(1.0, 1.0, B, eps)


def test_lower_bound_no_cost():
    assert lower_bound_no_cost(1.0, unit()) == 0.5
    assert lower_bound_no_cost(0.0, unit()) == 1.0
    mus = np.geomspace(1e-3, 1e9, 200)
    vals = [lower_bound_no_cost(m, unit()) for m in mus]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-8
    with pytest.raises(DomainError):
        lower_bound_no_cost(-1.0, unit())


def test_lower_bound_with_cost():
    assert lower_bound_with_cost(2.0, unit(eps=1.5)) == pytest.approx(0.5959179422778392, abs=1e-6)
    for mu in (0.0, 0.3, 2.0, 11.0):
        assert lower_bound_with_cost(mu, unit()) == lower_bound_no_cost(mu, unit())
    assert lower_bound_with_cost(0.0, unit(eps=1.5)) == 1.0
    with pytest.raises(DomainError):
        lower_bound_with_cost(-0.1, unit(eps=1.0))


def test_oracle_values_are_what_we_froze():
    for p, v in RENEWAL_B2.items():
        got = cycle_average(p, 2.0, lambda e: 1 / (1 + e))
        assert got == pytest.approx(v, abs=1e-12)


@pytest.mark.parametrize("p", sorted(RENEWAL_B2))
def test_renewal_series_matches_oracle(p):
    assert bernoulli_renewal_ffp(p, unit()) == pytest.approx(RENEWAL_B2[p], abs=1e-11)


def test_renewal_full_probability_is_single_term():
    assert bernoulli_renewal_ffp(1.0, unit()) == pytest.approx(1 / 3, abs=1e-15)
    assert bernoulli_renewal_ffp_with_cost(1.0, unit(B=4, eps=1.5)) == lower_bound_with_cost(
        4.0, unit(B=4, eps=1.5)
    )


def test_renewal_envelope():
    v = bernoulli_renewal_ffp(0.5, unit())
    assert 0.5 <= v <= 0.5 + 1 / 3
    assert v <= 0.8333333333333334


def test_renewal_zero_probability_warns():
    with pytest.warns(RuntimeWarning):
        assert bernoulli_renewal_ffp(0.0, unit()) == 1.0
    with pytest.raises(DomainError):
        bernoulli_renewal_ffp(1.2, unit())


def test_renewal_with_cost():
    v = bernoulli_renewal_ffp_with_cost(0.5, unit(B=4, eps=1.5))
    assert v == pytest.approx(RENEWAL_COST_B4, abs=1e-8)
    lower = lower_bound_with_cost(2.0, unit(B=4, eps=1.5))
    assert lower <= v <= lower + 0.5
    assert grid_single_slot(2.0, 1.5, step=1e-6)[1] == pytest.approx(lower, abs=1e-9)


@pytest.mark.parametrize("p", [0.05, 0.3, 0.5, 0.77, 1.0])
def test_renewal_with_zero_cost_equals_plain(p):
    a = bernoulli_renewal_ffp_with_cost(p, unit(B=3.0))
    b = bernoulli_renewal_ffp(p, unit(B=3.0))
    assert abs(a - b) <= 1e-12


def test_truncation_respects_tail_tol():
    exact = bernoulli_renewal_ffp(0.1, unit(), tail_tol=1e-15)
    assert abs(bernoulli_renewal_ffp(0.1, unit(), tail_tol=1e-4) - exact) <= 1e-4


def test_gap_terms():
    assert gap_terms(1.0, unit()) == (0.0, 0.5)
    bern, gap = gap_terms(0.5, unit())
    assert bern == pytest.approx(1 / 3, abs=1e-15) and gap == 0.5
    p = np.linspace(1e-9, 1, 10_001)
    vals = np.array([gap_terms(x, unit())[0] for x in p])
    assert vals.max() <= 0.5
    assert vals.max() > 0.5 - 1e-8
    # same closed form as p(1-p)/(1-(1-p)^2)
    assert np.allclose(vals, p * (1 - p) / (1 - (1 - p) ** 2), atol=1e-12)


def test_lower_bound_convex_decreasing_grid():
    mu = np.linspace(0, 20, 1000)
    for eps in (0.0, 0.1, 1.0, 1.5, 10.0):
        f = split_budget(mu, unit(eps=eps))[2]
        assert np.diff(f).max() <= 0.0
        assert np.diff(f, 2).min() >= -1e-9


def test_step_a_inequality():
    rng = np.random.default_rng(5)
    lam = rng.uniform(0, 1, 10_000)
    x = rng.exponential(5.0, 10_000)
    assert np.all(1 / (1 + lam * x) <= 1 / (1 + x) + (1 - lam) + 1e-12)


@pytest.mark.parametrize("eps", [0.0, 1.5])
@pytest.mark.parametrize("B", [0.25, 1.0, 3.0, 10.0])
@pytest.mark.parametrize("q", [0.1, 0.5, 0.9])
def test_bound_report_sandwich(eps, B, q):
    r = bound_report(q, unit(B=B, eps=eps))
    assert r.sandwich_ok()
    assert r.bern_gap_term <= r.gap_bound
    if eps == 0:
        assert r.renewal_value <= r.lower + r.bern_gap_term + 1e-12


def test_bound_report_tight_tolerance_fails():
    r = bound_report(0.5, unit())
    assert not r.sandwich_ok(gap=0.0)
