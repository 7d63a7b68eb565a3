"""Hypothesis generators shared by the property tests."""

from itertools import combinations

from hypothesis import strategies as st

from marshallian import (
    Cost,
    Degenerate,
    MarketGraph,
    PaymentRule,
    Scenario,
    Side,
    TypeProfile,
    Value,
    make_group,
)

values = st.floats(0, 10, allow_nan=False, allow_infinity=False)
# quarter-integers keep sums exact so ties genuinely occur
grid_values = st.integers(0, 40).map(lambda x: x / 4)


@st.composite
def general_graphs(draw, max_agents=6, vals=values):
    n = draw(st.integers(2, max_agents))
    agents = [f"x{i}" for i in range(n)]
    pairs = list(combinations(agents, 2))
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=len(pairs), unique=True))
    groups = [make_group(p) for p in chosen]
    entries = {(a, g): Value(draw(vals)) for g in groups for a in g}
    graph = MarketGraph(tuple(agents), tuple(groups))
    return Scenario(graph, Degenerate(TypeProfile(entries)))


@st.composite
def bipartite_markets(draw, max_side=3, vals=values):
    nb = draw(st.integers(1, max_side))
    na = draw(st.integers(1, max_side))
    bidders = [f"b{i}" for i in range(nb)]
    askers = [f"a{j}" for j in range(na)]
    pairs = [(b, a) for b in bidders for a in askers]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=len(pairs), unique=True))
    groups = [make_group(p) for p in chosen]
    labels = {b: Side.BIDDER for b in bidders} | {a: Side.ASKER for a in askers}
    graph = MarketGraph(tuple(bidders + askers), tuple(groups), 2, labels)
    entries = {}
    for g in groups:
        b, a = graph.bidder_asker(g)
        entries[(b, g)] = Value(draw(vals))
        entries[(a, g)] = Cost(draw(vals))
    return Scenario(graph, Degenerate(TypeProfile(entries)), PaymentRule.QUARTER_REBATE)
