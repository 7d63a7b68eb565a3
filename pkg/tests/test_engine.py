import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from marshallian import (
    BidSchedule,
    FiniteSupport,
    InspectTrigger,
    Inspectable,
    MarketGraph,
    PaymentRule,
    PriceSchedule,
    StrategyProfile,
    TypeProfile,
    Value,
    WeightedInstance,
    clock_convert,
    constant,
    constant_schedule,
    greedy_matching,
    make_group,
    run_match,
    run_schedules,
    settle_edge,
    surplus,
    truthful,
)
from marshallian.engine import compute_utilities
from marshallian.scenarios import fig1, triangle

from strategies_h import bipartite_markets, general_graphs, grid_values

AB = make_group("AB")


def single_edge(va=6.0, vb=4.0):
    graph = MarketGraph(("A", "B"), (AB,))
    return graph, TypeProfile({("A", AB): Value(va), ("B", AB): Value(vb)})


# --- clock ----------------------------------------------------------------------------


def test_clock_examples():
    s = PriceSchedule()
    assert clock_convert(s, time=0.5) == 1.0
    assert clock_convert(s, time=1.0) == 0.0
    assert clock_convert(s, price=0.5) == 0.75


def test_clock_time_zero_needs_cap():
    with pytest.raises(ValueError):
        PriceSchedule().price_at_time(0.0)
    assert PriceSchedule(50.0).price_at_time(0.0) == 50.0


@given(st.floats(1e-6, 1.0))
def test_clock_round_trip(t):
    s = PriceSchedule()
    assert abs(s.time_at_price(s.price_at_time(t)) - t) <= 1e-9


@given(st.floats(1e-6, 1.0), st.floats(1e-6, 1.0))
def test_clock_strictly_decreasing(t1, t2):
    assume(t1 < t2)
    s = PriceSchedule()
    assert s.price_at_time(t1) > s.price_at_time(t2)


# --- single runs ------------------------------------------------------------------------


def test_single_edge_truthful():
    graph, types = single_edge()
    tr = run_match(graph, types, StrategyProfile.uniform(graph, truthful))
    assert [(m.group, m.price) for m in tr.matches] == [(AB, 10.0)]
    assert tr.payments == {"A": 6.0, "B": 4.0}
    assert tr.utilities == {"A": 0.0, "B": 0.0}
    assert tr.welfare == 10.0


def test_triangle_matches_highest_edge():
    sc = triangle()
    tr = run_match(sc.graph, sc.prior.profile, StrategyProfile.uniform(sc.graph, truthful), seed=7)
    assert [(m.group, m.price) for m in tr.matches] == [(AB, 10.0)]
    assert tr.group_of("C") is None


def test_fig1_overbid_trace():
    sc = fig1(10.0)
    prof = StrategyProfile.uniform(sc.graph, truthful).replace({"B": constant({make_group("BC"): 12.0})})
    tr = run_match(sc.graph, sc.prior.profile, prof, sc.payment_rule)
    (m,) = tr.matches
    assert m.group == make_group("BC") and m.price == 12.0
    assert tr.utilities["B"] == 1.0


def test_settle_edge_examples():
    g = make_group(("b", "a"))
    pay, reb = settle_edge(g, {"b": 2.0, "a": -1.0}, PaymentRule.QUARTER_REBATE)
    assert pay == {"b": 1.75, "a": -1.25} and reb == {"a": 0.25, "b": 0.25}
    _, reb = settle_edge(g, {"b": 11.0, "a": 0.0}, PaymentRule.QUARTER_REBATE)
    assert reb == {"a": 2.75, "b": 2.75}
    pay, reb = settle_edge(AB, {"A": 6.0, "B": 4.0}, PaymentRule.PAY_YOUR_BID)
    assert pay == {"A": 6.0, "B": 4.0} and reb == {"A": 0.0, "B": 0.0}


def test_rebate_needs_pairs():
    with pytest.raises(ValueError):
        settle_edge(make_group("ABC"), {"A": 1.0, "B": 1.0, "C": 1.0}, PaymentRule.QUARTER_REBATE)


def test_utilities_of_unmatched_and_inspecting_agents():
    g1, g2 = make_group("AB"), make_group("AC")
    graph = MarketGraph(tuple("ABC"), (g1, g2))
    dist = FiniteSupport(((0.0, 0.5), (2.0, 0.5)))
    types = TypeProfile(
        {
            ("A", g1): Inspectable(0.5, dist, 0.0),
            ("A", g2): Inspectable(0.5, dist, 0.0),
            ("B", g1): Value(0.0),
            ("C", g2): Value(0.0),
        }
    )
    trig = (InspectTrigger(g1, 0.9), InspectTrigger(g2, 0.8))
    scheds = {
        "A": BidSchedule("A", {g1: ((math.inf, -1.0),), g2: ((math.inf, -1.0),)}, trig),
        "B": constant_schedule("B", {g1: -1.0}),
        "C": constant_schedule("C", {g2: -1.0}),
    }
    tr = run_schedules(graph, types, scheds)
    assert tr.matches == ()
    assert tr.utilities["A"] == -1.0
    assert tr.utilities["B"] == 0.0


def test_jump_fires_at_current_price():
    graph, types = single_edge(10.0, 0.0)
    types = types.replace({("A", AB): Inspectable(1.0, FiniteSupport(((0.0, 0.5), (10.0, 0.5))), 10.0)})
    scheds = {
        "A": BidSchedule("A", {AB: ((math.inf, 0.0),)}, (InspectTrigger(AB, 4.0),)),
        "B": constant_schedule("B", {AB: 0.0}),
    }
    tr = run_schedules(graph, types, scheds)
    (m,) = tr.matches
    assert m.price == 4.0 and m.bids["A"] == 5.0
    assert tr.utilities["A"] == 10.0 - 5.0 - 1.0


def test_trigger_on_removed_group_never_fires():
    bc = make_group("BC")
    graph = MarketGraph(("A", "B", "C"), (AB, bc))
    types = TypeProfile({
        ("A", AB): Value(6.0),
        ("B", AB): Value(4.0),
        ("B", bc): Value(0.0),
        ("C", bc): Inspectable(1.0, FiniteSupport(((0.0, 0.5), (10.0, 0.5))), 10.0),
    })
    scheds = {
        "A": constant_schedule("A", {AB: 6.0}),
        "B": constant_schedule("B", {AB: 4.0, bc: 0.0}),
        "C": BidSchedule("C", {bc: ((math.inf, 0.0),)}, (InspectTrigger(bc, 4.0),)),
    }
    tr = run_schedules(graph, types, scheds)
    assert tr.matched_groups() == [AB]
    assert not tr.inspected and tr.utilities["C"] == 0.0


def test_forced_inspection_charged_at_match():
    graph, types = single_edge()
    types = types.replace({("A", AB): Inspectable(1.0, FiniteSupport(((6.0, 1.0),)), 6.0)})
    scheds = {"A": constant_schedule("A", {AB: 3.0}), "B": constant_schedule("B", {AB: 0.0})}
    tr = run_schedules(graph, types, scheds)
    assert ("A", AB) in tr.inspected and ("A", AB) in tr.matched
    assert tr.utilities["A"] == 6.0 - 3.0 - 1.0


def test_schedule_breakpoints():
    graph, types = single_edge()
    scheds = {
        "A": BidSchedule("A", {AB: ((math.inf, 0.0), (3.0, 2.5))}),
        "B": constant_schedule("B", {AB: 0.0}),
    }
    (m,) = run_schedules(graph, types, scheds).matches
    assert m.price == 2.5


def test_schedule_undefined_above_cap_faults():
    graph, types = single_edge()
    scheds = {"A": BidSchedule("A", {AB: ((5.0, 1.0),)}), "B": constant_schedule("B", {AB: 0.0})}
    with pytest.raises(ValueError):
        run_schedules(graph, types, scheds, clock=PriceSchedule(100.0))


def test_negative_sums_never_match():
    graph, types = single_edge()
    scheds = {"A": constant_schedule("A", {AB: -1.0}), "B": constant_schedule("B", {AB: 0.5})}
    assert run_schedules(graph, types, scheds).matches == ()


def test_crossings_above_cap_fire_at_start():
    graph, types = single_edge()
    scheds = {"A": constant_schedule("A", {AB: 60.0}), "B": constant_schedule("B", {AB: 0.0})}
    (m,) = run_schedules(graph, types, scheds, clock=PriceSchedule(10.0)).matches
    assert m.price == 60.0 and m.time == PriceSchedule(10.0).start_time


def test_compute_utilities_matches_transcript():
    sc = fig1()
    tr = run_match(sc.graph, sc.prior.profile, StrategyProfile.uniform(sc.graph, truthful), sc.payment_rule)
    assert compute_utilities(tr, sc.prior.profile) == tr.utilities


# --- properties --------------------------------------------------------------------------


def _truthful_run(sc, seed=0):
    return run_match(sc.graph, sc.prior.profile, StrategyProfile.uniform(sc.graph, truthful), sc.payment_rule, seed)


@given(general_graphs(), st.integers(0, 2**32))
def test_determinism(sc, seed):
    assert _truthful_run(sc, seed).to_json() == _truthful_run(sc, seed).to_json()


@given(st.one_of(general_graphs(), bipartite_markets()), st.integers(0, 1000))
def test_transcript_invariants(sc, seed):
    tr = _truthful_run(sc, seed)
    prices = [m.price for m in tr.matches]
    assert prices == sorted(prices, reverse=True)
    seen = [a for m in tr.matches for a in m.group]
    assert len(seen) == len(set(seen))
    assert math.isclose(tr.welfare, sum(tr.utilities.values()) + sum(tr.payments.values()), abs_tol=1e-9)
    realized = sum(surplus(sc.prior.profile, m.group) for m in tr.matches) - sum(tr.inspection_costs.values())
    assert math.isclose(tr.welfare, realized, abs_tol=1e-9)


@given(general_graphs(vals=grid_values), st.integers(0, 1000))
def test_truthful_equals_greedy_with_ties(sc, seed):
    tr = _truthful_run(sc, seed)
    inst = WeightedInstance.from_surplus(sc.graph.groups, sc.prior.profile)
    greedy, _ = greedy_matching(inst, seed)
    engine = [m.group for m in tr.matches if surplus(sc.prior.profile, m.group) > 0]
    assert engine == list(greedy)


@given(bipartite_markets())
def test_truthful_rebate_splits_surplus(sc):
    tr = _truthful_run(sc)
    for m in tr.matches:
        b, a = sc.graph.bidder_asker(m.group)
        s = surplus(sc.prior.profile, m.group)
        assert math.isclose(tr.utilities[b], s / 4, abs_tol=1e-9)
        assert math.isclose(tr.utilities[a], s / 4, abs_tol=1e-9)


@given(general_graphs(), st.integers(0, 100))
def test_removal_keeps_other_crossings(sc, seed):
    tr = _truthful_run(sc, seed)
    assume(tr.matches)
    first = tr.matches[0].group
    rest = [g for g in sc.graph.groups if not set(g) & set(first)]
    sub_agents = tuple(a for a in sc.graph.agents if a not in first)
    sub_types = TypeProfile({k: v for k, v in sc.prior.profile.entries.items() if k[1] in rest})
    sub = MarketGraph(sub_agents, tuple(rest))
    if not rest:
        assert len(tr.matches) == 1
        return
    again = run_match(sub, sub_types, StrategyProfile.uniform(sub, truthful))
    assert sorted(m.price for m in again.matches) == sorted(m.price for m in tr.matches[1:])
