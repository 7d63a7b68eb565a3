"""Descending-price matching markets: engine, strategies, oracles and audits."""

from .auditors import (
    PoAReport,
    ex_ante_audit,
    ex_post_audit,
    expected_welfare,
    nash_audit,
    poa_report,
    replay_witness,
    smoothness_check,
)
from .clock import PriceSchedule, clock_convert
from .engine import MatchRecord, Transcript, run_match, run_schedules, settle_edge
from .market import (
    AgentType,
    Cost,
    Degenerate,
    ExplicitJoint,
    FiniteSupport,
    IndependentEntries,
    Inspectable,
    MarketGraph,
    PaymentRule,
    PointMass,
    RandomCost,
    RandomValue,
    Scenario,
    Side,
    TypeProfile,
    Uniform,
    Value,
    complete_bipartite,
    complete_graph,
    make_group,
    realize_types,
    scenario_from_json,
    scenario_to_json,
    surplus,
    validate_scenario,
)
from .oracles import WeightedInstance, expected_opt, greedy_matching, max_weight_matching
from .pandora import covered_call, covered_call_gap, exercise_audit, strike_price
from .report import AuditReport
from .schedule import BidSchedule, InspectTrigger, constant_schedule
from .strategies import (
    DeviationFamily,
    StrategyProfile,
    constant,
    half_value,
    pairwise_truthful,
    refusal,
    refusal_profile,
    truthful,
    zero_then_inspect,
    zero_then_inspect_covered,
)

__all__ = [name for name in dir() if not name.startswith("_")]
