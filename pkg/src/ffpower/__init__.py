"""Near-optimal online power control for energy harvesting sensors."""

from ._backend import BACKEND
from .bounds import (
    BoundReport,
    bernoulli_renewal_ffp,
    bernoulli_renewal_ffp_with_cost,
    bound_report,
    gap_terms,
    lower_bound,
    lower_bound_no_cost,
    lower_bound_with_cost,
)
from .core import (
    ArrivalModel,
    BatteryState,
    Bernoulli,
    DomainError,
    EnergyCausalityError,
    FiniteSupport,
    Sampler,
    SlotDecision,
    SystemParams,
    slot_distortion,
    slot_distortion_with_cost,
    step_battery,
)
from .policies import (
    ConvergenceError,
    DegenerateCostError,
    FixedFractionPolicy,
    GreedyPolicy,
    PolicyTable,
    TablePolicy,
    UnsupportedModelError,
    dp_optimal_policy,
    ffp_power,
    ffp_with_cost,
    greedy_policy,
    single_slot_optimal,
    split_budget,
)
from .sim import (
    SimConfig,
    SimResult,
    TraceRecord,
    monte_carlo,
    run_trial,
    simulate_arrivals,
    sweep_battery,
)

__version__ = "0.1.0"
