import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from marshallian import (
    Cost,
    Degenerate,
    ExplicitJoint,
    FiniteSupport,
    IndependentEntries,
    Inspectable,
    MarketGraph,
    PaymentRule,
    PointMass,
    Scenario,
    TypeProfile,
    Uniform,
    Value,
    make_group,
    realize_types,
    scenario_from_json,
    scenario_to_json,
    surplus,
    validate_scenario,
)
from marshallian.market import RandomValue, group_key, parse_group_key
from marshallian.scenarios import BUILTIN, refusal_market

from strategies_h import bipartite_markets, general_graphs, values


def test_groups_are_canonical():
    assert make_group(("B", "A")) == ("A", "B")
    assert parse_group_key(group_key(make_group("CAB"))) == ("A", "B", "C")


def test_valid_rebate_market():
    assert validate_scenario(refusal_market(2)).ok


def test_rebate_without_side_labels():
    sc = refusal_market(2)
    g = sc.graph
    unlabeled = Scenario(MarketGraph(g.agents, g.groups), sc.prior, PaymentRule.QUARTER_REBATE)
    assert "rebate requires side labels" in " ".join(validate_scenario(unlabeled).messages())


def test_inspection_mean_below_cost():
    g = make_group("AB")
    graph = MarketGraph(("A", "B"), (g,))
    prof = TypeProfile({("A", g): Inspectable(1.0, PointMass(0.5)), ("B", g): Value(0.0)})
    msgs = validate_scenario(Scenario(graph, Degenerate(prof))).messages()
    assert any("mean(D) < r" in m for m in msgs)


def test_cost_only_for_askers():
    sc = refusal_market(1)
    g = sc.graph.groups[0]
    bad = sc.prior.profile.replace({("b0", g): Cost(1.0)})
    msgs = validate_scenario(Scenario(sc.graph, Degenerate(bad), PaymentRule.QUARTER_REBATE)).messages()
    assert msgs


def test_missing_incidence_reported():
    g = make_group("AB")
    graph = MarketGraph(("A", "B"), (g,))
    msgs = validate_scenario(Scenario(graph, Degenerate(TypeProfile({("A", g): Value(1.0)})))).messages()
    assert msgs


def test_explicit_joint_probabilities_must_sum_to_one():
    sc = refusal_market(1)
    bad = Scenario(sc.graph, ExplicitJoint(((sc.prior.profile, 0.7),)), PaymentRule.QUARTER_REBATE)
    assert any("probabilities must sum to 1" in m for m in validate_scenario(bad).messages())


def test_oversized_group_rejected():
    graph = MarketGraph(tuple("ABC"), (make_group("ABC"),), max_group_size=2)
    prof = TypeProfile({(a, make_group("ABC")): Value(1.0) for a in "ABC"})
    assert not validate_scenario(Scenario(graph, Degenerate(prof))).ok


def test_surplus_examples():
    g = make_group("ij")
    assert surplus(TypeProfile({("i", g): Value(6), ("j", g): Value(4)}), g) == 10
    assert surplus(TypeProfile({("i", g): Value(2), ("j", g): Cost(1)}), g) == 1
    h = make_group("abc")
    prof = TypeProfile({("a", h): Value(3), ("b", h): Value(0), ("c", h): Value(-1)})
    assert surplus(prof, h) == 2


def test_surplus_missing_member_faults():
    g = make_group("ij")
    with pytest.raises(KeyError):
        surplus(TypeProfile({("i", g): Value(6)}), g)


def test_realize_degenerate_and_unit_mass():
    sc = refusal_market(2)
    assert realize_types(sc.prior, 123) == sc.prior.profile
    joint = ExplicitJoint(((sc.prior.profile, 1.0),))
    assert realize_types(joint, 99) == sc.prior.profile


def test_binary_frequency_over_seeds():
    g = make_group("AB")
    prior = IndependentEntries({("A", g): RandomValue(FiniteSupport(((0.0, 0.5), (10.0, 0.5))))})
    draws = [realize_types(prior, s).value("A", g) for s in range(10_000)]
    assert set(draws) <= {0.0, 10.0}
    assert abs(np.mean(np.array(draws) == 10.0) - 0.5) <= 0.02


@given(st.integers(0, 2**63), st.sampled_from(sorted(BUILTIN)))
def test_realize_types_is_pure(seed, name):
    prior = BUILTIN[name]().prior
    a, b = realize_types(prior, seed), realize_types(prior, seed)
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)


@given(st.lists(values, min_size=2, max_size=5), st.randoms())
def test_surplus_symmetric(vals, rnd):
    names = [f"m{i}" for i in range(len(vals))]
    g = make_group(names)
    prof = TypeProfile({(a, g): Value(v) for a, v in zip(names, vals)})
    shuffled = names[:]
    rnd.shuffle(shuffled)
    assert surplus(prof, make_group(shuffled)) == surplus(prof, g)


@given(st.lists(values, min_size=2, max_size=4), values, st.integers(0, 3))
def test_surplus_linear_in_member(vals, delta, idx):
    names = [f"m{i}" for i in range(len(vals))]
    g = make_group(names)
    prof = TypeProfile({(a, g): Value(v) for a, v in zip(names, vals)})
    who = names[idx % len(names)]
    bumped = prof.replace({(who, g): Value(prof.value(who, g) + delta)})
    assert surplus(bumped, g) == pytest.approx(surplus(prof, g) + delta, abs=1e-9)


@given(st.one_of(general_graphs(), bipartite_markets()))
def test_scenario_json_round_trip(sc):
    assert validate_scenario(sc).ok
    back = scenario_from_json(json.loads(json.dumps(scenario_to_json(sc))))
    assert scenario_to_json(back) == scenario_to_json(sc)


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_builtin_scenarios_valid_and_round_trip(name):
    sc = BUILTIN[name]()
    assert validate_scenario(sc).ok, validate_scenario(sc).messages()
    assert scenario_to_json(scenario_from_json(scenario_to_json(sc))) == scenario_to_json(sc)


def test_malformed_scenario_json():
    with pytest.raises(ValueError):
        scenario_from_json({"graph": {"agents": ["A"]}})


def test_distribution_moments():
    d = FiniteSupport(((0.0, 0.5), (10.0, 0.5)))
    assert d.mean() == 5.0 and d.expected_excess(8.0) == 1.0
    u = Uniform(0.0, 1.0)
    assert u.expected_excess(0.5) == pytest.approx(0.125)
    assert PointMass(5.0).expected_excess(4.0) == 1.0
