import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from marshallian import (
    AgentType,
    Cost,
    DeviationFamily,
    FiniteSupport,
    Inspectable,
    MarketGraph,
    PaymentRule,
    Side,
    StrategyProfile,
    TypeProfile,
    Value,
    constant,
    constant_schedule,
    half_value,
    make_group,
    pairwise_truthful,
    refusal_profile,
    run_match,
    truthful,
    zero_then_inspect,
)
from marshallian.schedule import INF, BidSchedule
from marshallian.scenarios import fig1, refusal_market
from marshallian.strategies import resolve_strategy

from strategies_h import general_graphs

E1, E2 = make_group("ix"), make_group("iy")
BINARY = FiniteSupport(((0.0, 0.5), (10.0, 0.5)))


def test_truthful_examples():
    t = AgentType("i", {E1: Value(2.0), E2: Value(5.0)}, Side.BIDDER)
    s = truthful(t)
    assert (s.bid_at(E1, 3.0), s.bid_at(E2, 0.0)) == (2.0, 5.0)
    asker = truthful(AgentType("i", {E1: Cost(1.0), E2: Cost(3.0)}, Side.ASKER))
    assert (asker.bid_at(E1, 1.0), asker.bid_at(E2, 1.0)) == (-1.0, -3.0)
    sc = fig1(10.0)
    a_type = sc.prior.profile.agent_type("A", Side.BIDDER)
    assert truthful(a_type).bid_at(make_group("AC"), 0.0) == 11.0


def test_truthful_rejects_inspectables():
    with pytest.raises(ValueError):
        truthful(AgentType("i", {E1: Inspectable(1.0, BINARY)}))


def test_half_value_examples():
    t = AgentType("i", {E1: Value(6.0), E2: Value(0.0), make_group("ixy"): Value(9.0)})
    s = half_value(t)
    assert s.bid_at(E1, 1.0) == 3.0 and s.bid_at(E2, 1.0) == 0.0
    assert s.bid_at(make_group("ixy"), 1.0) == 4.5
    with pytest.raises(ValueError):
        half_value(AgentType("i", {E1: Value(-1.0)}))
    with pytest.raises(ValueError):
        half_value(AgentType("i", {E1: Cost(1.0)}))


def test_zero_then_inspect_schedule():
    s = zero_then_inspect(AgentType("i", {E1: Inspectable(1.0, BINARY)}))
    assert s.bid_at(E1, 100.0) == 0.0
    (trig,) = s.reactive
    assert trig.trigger_price == pytest.approx(4.0, abs=1e-9)
    assert trig.post_bid(10.0) == 5.0 and trig.post_bid(0.0) == 0.0


def test_refusal_profile_blocks_everything():
    sc = refusal_market(2)
    tr = run_match(sc.graph, sc.prior.profile, refusal_profile(sc.graph), sc.payment_rule)
    assert tr.matches == () and tr.welfare == 0.0


@pytest.mark.parametrize("ask, expected", [(0.0, -1.0)])
def test_refusal_asker_deviation(ask, expected):
    sc = refusal_market(2)
    prof = refusal_profile(sc.graph)
    incident = sc.graph.incident("a0")
    dev = prof.replace({"a0": constant({g: (ask if "b0" in g else 4.0) for g in incident})})
    tr = run_match(sc.graph, sc.prior.profile, dev, sc.payment_rule)
    (m,) = tr.matches
    assert m.price == 0.0 and m.rebates["a0"] == 0.0
    assert tr.utilities["a0"] == expected


def test_pairwise_truthful_on_refusal():
    sc = refusal_market(2)
    prof = pairwise_truthful(refusal_profile(sc.graph), "b0", "a0", sc.graph)
    tr = run_match(sc.graph, sc.prior.profile, prof, sc.payment_rule)
    assert tr.utilities["b0"] + tr.utilities["a0"] == 0.5
    with pytest.raises(ValueError):
        pairwise_truthful(prof, "b0", "b1", sc.graph)


def test_pairwise_truthful_idempotent_on_truthful():
    sc = fig1()
    base = StrategyProfile.uniform(sc.graph, truthful)
    assert pairwise_truthful(base, "A", "C", sc.graph).constructors == base.constructors


def test_constant_schedule_examples():
    assert constant_schedule("i", {E1: 3.0}).bid_at(E1, 1e9) == 3.0
    assert constant_schedule("i", {}).per_group == {}
    assert constant_schedule("i", {E1: -2.0}).bid_at(E1, 0.0) == -2.0
    with pytest.raises(ValueError):
        constant_schedule("i", {E1: 1.0}, incident=[E1, E2])


def test_schedule_round_trip():
    s = BidSchedule("i", {E1: ((INF, 0.0), (4.0, 1.5))})
    assert BidSchedule.from_dict(s.to_dict()) == s


def test_resolve_strategy_ids():
    assert resolve_strategy("truthful") is truthful
    s = resolve_strategy('constant:{"i,x": 3}')(AgentType("i", {E1: Value(1.0)}))
    assert s.bid_at(E1, 0.0) == 3.0
    with pytest.raises(ValueError):
        resolve_strategy("nope")


def test_default_grid_levels():
    fam = DeviationFamily("constantGrid")
    sc = fig1()
    plans = fam.strategies_for("A", sc.graph)
    t = sc.prior.profile.agent_type("A", Side.BIDDER)
    bids = sorted(p(t).bid_at(make_group("AC"), 0.0) for p in plans)
    assert bids == [-2.0, -1.0, -0.5, 0.0, 2.75, 5.5, 11.0, 13.0, 16.5]


def test_grid_capped():
    fam = DeviationFamily("constantGrid", cap=200)
    sc = refusal_market(3)
    assert len(fam.strategies_for("b0", sc.graph)) == 200 > 0


@given(general_graphs(), st.floats(-5, 5))
def test_privacy(sc, bump):
    """Changing someone else's type never changes an agent's schedule."""
    types = sc.prior.profile
    graph = sc.graph
    target = graph.agents[0]
    others = [(a, g) for (a, g) in types.entries if a != target]
    if not others:
        return
    key = others[0]
    changed = types.replace({key: Value(types.value(*key) + bump)})
    for strategy in (truthful, half_value) if bump >= 0 else (truthful,):
        a = StrategyProfile.uniform(graph, strategy).schedules(types, graph)[target]
        b = StrategyProfile.uniform(graph, strategy).schedules(changed, graph)[target]
        assert a == b


def test_inspectable_draw_hidden_from_owner():
    types = TypeProfile({("i", E1): Inspectable(1.0, BINARY, 10.0)})
    assert types.agent_type("i").entries[E1].drawn is None


@given(general_graphs(), st.integers(0, 100))
def test_half_value_never_negative(sc, seed):
    """A half-value deviator keeps nonnegative utility against any constant nonnegative bids."""
    graph, types = sc.graph, sc.prior.profile
    for a in graph.agents:
        if not graph.incident(a):
            continue
        base = StrategyProfile.uniform(graph, truthful).replace({a: half_value})
        tr = run_match(graph, types, base, PaymentRule.PAY_YOUR_BID, seed)
        assert tr.utilities[a] >= -1e-12
        g = tr.group_of(a)
        if g is not None:
            assert math.isclose(tr.utilities[a], types.value(a, g) / 2, abs_tol=1e-12)


def test_half_value_pair_utility_is_half_price():
    g = make_group("AB")
    graph = MarketGraph(("A", "B"), (g,))
    types = TypeProfile({("A", g): Value(6.0), ("B", g): Value(6.0)})
    tr = run_match(graph, types, StrategyProfile.uniform(graph, half_value))
    (m,) = tr.matches
    assert tr.utilities["A"] == m.price / 2
