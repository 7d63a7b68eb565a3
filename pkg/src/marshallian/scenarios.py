"""Built-in scenarios and random instance generators."""

from __future__ import annotations

from itertools import combinations, permutations

from ._rng import make_rng
from .market import (
    Cost,
    Degenerate,
    ExplicitJoint,
    FiniteSupport,
    IndependentEntries,
    Inspectable,
    MarketGraph,
    PaymentRule,
    RandomValue,
    Scenario,
    Side,
    TypeProfile,
    Uniform,
    Value,
    complete_bipartite,
    complete_graph,
    make_group,
)


def _split_surplus(graph: MarketGraph, surpluses: dict) -> TypeProfile:
    entries = {}
    for g, s in surpluses.items():
        g = make_group(g)
        for a in g:
            entries[(a, g)] = Value(s / len(g))
    return TypeProfile(entries)


def triangle(weights=(10.0, 8.0, 6.0)) -> Scenario:
    """A, B, C pairwise connected; each edge's surplus split evenly."""
    graph = complete_graph("ABC")
    s_ab, s_ac, s_bc = weights
    profile = _split_surplus(graph, {"AB": s_ab, "AC": s_ac, "BC": s_bc})
    return Scenario(graph, Degenerate(profile))


def fig1(k: float = 10.0) -> Scenario:
    """Bidders A, B share asker C (cost 0); A values C at k + 1, B at k."""
    graph = complete_bipartite("AB", "C")
    ac, bc = make_group("AC"), make_group("BC")
    profile = TypeProfile(
        {
            ("A", ac): Value(k + 1),
            ("B", bc): Value(k),
            ("C", ac): Cost(0.0),
            ("C", bc): Cost(0.0),
        }
    )
    return Scenario(graph, Degenerate(profile), PaymentRule.QUARTER_REBATE)


def refusal_market(n: int = 2, value: float = 2.0, cost: float = 1.0) -> Scenario:
    """Complete n x n bipartite market with identical values and costs."""
    bidders = [f"b{i}" for i in range(n)]
    askers = [f"a{j}" for j in range(n)]
    graph = complete_bipartite(bidders, askers)
    entries = {}
    for g in graph.groups:
        b, a = graph.bidder_asker(g)
        entries[(b, g)] = Value(value)
        entries[(a, g)] = Cost(cost)
    return Scenario(graph, Degenerate(TypeProfile(entries)), PaymentRule.QUARTER_REBATE)


BINARY = FiniteSupport(((0.0, 0.5), (10.0, 0.5)))


def pandora_binary(partner_value: float = 0.0) -> Scenario:
    """A must pay 1 to learn a value that is 0 or 10 with equal odds."""
    graph = MarketGraph(("A", "B"), (make_group("AB"),))
    g = make_group("AB")
    profile = TypeProfile({("A", g): Inspectable(1.0, BINARY), ("B", g): Value(partner_value)})
    return Scenario(graph, Degenerate(profile))


def group_demo() -> Scenario:
    """Six agents, four overlapping triples."""
    groups = [make_group(g) for g in ("ABC", "CDE", "ADF", "BEF")]
    graph = MarketGraph(tuple("ABCDEF"), tuple(groups), max_group_size=3)
    vals = {
        "ABC": (4.0, 3.0, 2.0),
        "CDE": (5.0, 1.0, 3.0),
        "ADF": (2.0, 6.0, 1.0),
        "BEF": (3.0, 2.0, 4.0),
    }
    entries = {}
    for key, vs in vals.items():
        g = make_group(key)
        for a, v in zip(g, vs):
            entries[(a, g)] = Value(v)
    return Scenario(graph, Degenerate(TypeProfile(entries)))


def lovers(n: int = 3, fated=(2.0, 1.0), unfated=(0.0, 10.0)) -> Scenario:
    """n x n market where a uniformly random perfect matching has surplus.

    Fated edges get (value, cost) ``fated``; all other edges ``unfated``.
    """
    bidders = [f"b{i}" for i in range(n)]
    askers = [f"a{j}" for j in range(n)]
    graph = complete_bipartite(bidders, askers)
    perms = list(permutations(range(n)))
    outcomes = []
    for perm in perms:
        entries = {}
        for i, b in enumerate(bidders):
            for j, a in enumerate(askers):
                g = make_group((b, a))
                v, c = fated if perm[i] == j else unfated
                entries[(b, g)] = Value(v)
                entries[(a, g)] = Cost(c)
        outcomes.append((TypeProfile(entries), 1.0 / len(perms)))
    return Scenario(graph, ExplicitJoint(tuple(outcomes)), PaymentRule.QUARTER_REBATE)


BUILTIN = {
    "triangle": triangle,
    "fig1": fig1,
    "refusal": refusal_market,
    "pandora": pandora_binary,
    "group": group_demo,
    "lovers": lovers,
}


# --- random instances --------------------------------------------------------------


def random_general(seed: int, max_agents: int = 8, edge_prob: float = 0.5) -> Scenario:
    """Random graph on 2..max_agents agents, each incidence value U[0,10]."""
    rng = make_rng(seed)
    n = int(rng.integers(2, max_agents + 1))
    agents = [f"x{i}" for i in range(n)]
    groups = [make_group(p) for p in combinations(agents, 2) if rng.random() < edge_prob]
    if not groups:
        groups = [make_group(agents[:2])]
    entries = {(a, g): Value(float(rng.uniform(0, 10))) for g in groups for a in g}
    return Scenario(MarketGraph(tuple(agents), tuple(groups)), Degenerate(TypeProfile(entries)))


def random_bipartite(seed: int, max_side: int = 4, edge_prob: float = 0.7) -> Scenario:
    """Random bipartite rebate market: values U[0,10], costs U[0,10]."""
    rng = make_rng(seed)
    nb, na = (int(x) for x in rng.integers(1, max_side + 1, size=2))
    bidders = [f"b{i}" for i in range(nb)]
    askers = [f"a{j}" for j in range(na)]
    groups = [make_group((b, a)) for b in bidders for a in askers if rng.random() < edge_prob]
    if not groups:
        groups = [make_group((bidders[0], askers[0]))]
    labels = {b: Side.BIDDER for b in bidders} | {a: Side.ASKER for a in askers}
    graph = MarketGraph(tuple(bidders + askers), tuple(groups), 2, labels)
    entries = {}
    for g in groups:
        b, a = graph.bidder_asker(g)
        entries[(b, g)] = Value(float(rng.uniform(0, 10)))
        entries[(a, g)] = Cost(float(rng.uniform(0, 10)))
    return Scenario(graph, Degenerate(TypeProfile(entries)), PaymentRule.QUARTER_REBATE)


def random_hypergraph(seed: int, agents: int = 6, groups: int = 4, k: int = 3) -> Scenario:
    """Random k-uniform hypergraph with nonnegative U[0,10] values."""
    rng = make_rng(seed)
    names = [f"x{i}" for i in range(agents)]
    triples = list(combinations(names, k))
    chosen = sorted(int(i) for i in rng.choice(len(triples), size=min(groups, len(triples)), replace=False))
    gs = [make_group(triples[i]) for i in chosen]
    entries = {(a, g): Value(float(rng.uniform(0, 10))) for g in gs for a in g}
    graph = MarketGraph(tuple(names), tuple(gs), max_group_size=k)
    return Scenario(graph, Degenerate(TypeProfile(entries)))


def random_inspection(seed: int, max_agents: int = 5, edge_prob: float = 0.6) -> Scenario:
    """Random graph where every incidence is inspectable.

    Distributions are two-point or uniform on [0, 10]; costs are small
    enough that the mean exceeds the inspection cost.
    """
    rng = make_rng(seed)
    n = int(rng.integers(2, max_agents + 1))
    names = [f"x{i}" for i in range(n)]
    gs = [make_group(p) for p in combinations(names, 2) if rng.random() < edge_prob]
    if not gs:
        gs = [make_group(names[:2])]
    entries = {}
    for g in gs:
        for a in g:
            if rng.random() < 0.5:
                lo, hi = sorted(float(x) for x in rng.uniform(0, 10, size=2))
                q = float(rng.uniform(0.1, 0.9))
                dist = FiniteSupport(((lo, q), (hi, 1 - q)))
            else:
                lo = float(rng.uniform(0, 5))
                dist = Uniform(lo, lo + float(rng.uniform(0.5, 5)))
            r = float(rng.uniform(0, 0.9)) * dist.mean()
            entries[(a, g)] = Inspectable(r, dist)
    graph = MarketGraph(tuple(names), tuple(gs))
    return Scenario(graph, IndependentEntries(entries))


def random_nonneg_uniform(seed: int, agents: int = 6, edge_prob: float = 0.5) -> Scenario:
    """Random graph whose values are drawn U[0,10] per realization."""
    rng = make_rng(seed)
    names = [f"x{i}" for i in range(agents)]
    gs = [make_group(p) for p in combinations(names, 2) if rng.random() < edge_prob]
    if not gs:
        gs = [make_group(names[:2])]
    entries = {(a, g): RandomValue(Uniform(0.0, 10.0)) for g in gs for a in g}
    return Scenario(MarketGraph(tuple(names), tuple(gs)), IndependentEntries(entries))


def random_square(seed: int, n: int = 2) -> Scenario:
    """n x n complete bipartite graph, nonnegative U[0,10] values on both sides."""
    rng = make_rng(seed)
    base = complete_bipartite([f"b{i}" for i in range(n)], [f"a{j}" for j in range(n)])
    entries = {(a, g): Value(float(rng.uniform(0, 10))) for g in base.groups for a in g}
    graph = MarketGraph(base.agents, base.groups)
    return Scenario(graph, Degenerate(TypeProfile(entries)))
