"""Market structure, agent types, priors, and scenario validation.

Groups are canonical sorted tuples of agent ids; a size-2 group is an edge.
Costs are stored as :class:`Cost` entries and exposed to the engine as
negated values through :meth:`TypeProfile.value` (the one place the asker
sign convention lives).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Union

import numpy as np

from ._rng import make_rng

AgentId = str
Group = tuple  # tuple[AgentId, ...], sorted
Incidence = tuple  # (AgentId, Group)

PROB_TOL = 1e-12


def make_group(members: Iterable[AgentId]) -> Group:
    return tuple(sorted(members))


def group_key(group: Group) -> str:
    return ",".join(group)


def parse_group_key(key: str) -> Group:
    return make_group(part.strip() for part in key.split(","))


class Side(str, enum.Enum):
    BIDDER = "Bidder"
    ASKER = "Asker"


# --- distributions -----------------------------------------------------------


@dataclass(frozen=True)
class PointMass:
    v: float

    def mean(self) -> float:
        return float(self.v)

    def support_min(self) -> float:
        return float(self.v)

    def support_max(self) -> float:
        return float(self.v)

    def expected_excess(self, sigma: float) -> float:
        return max(self.v - sigma, 0.0)

    def sample(self, rng: np.random.Generator) -> float:
        return float(self.v)


@dataclass(frozen=True)
class FiniteSupport:
    points: tuple  # ((value, probability), ...)

    def __post_init__(self):
        object.__setattr__(
            self, "points", tuple((float(v), float(p)) for v, p in self.points)
        )

    def total_probability(self) -> float:
        return math.fsum(p for _, p in self.points)

    def mean(self) -> float:
        return math.fsum(v * p for v, p in self.points)

    def support_min(self) -> float:
        return min(v for v, p in self.points if p > 0)

    def support_max(self) -> float:
        return max(v for v, p in self.points if p > 0)

    def expected_excess(self, sigma: float) -> float:
        return math.fsum(p * (v - sigma) for v, p in self.points if v > sigma)

    def sample(self, rng: np.random.Generator) -> float:
        # inverse CDF over the listed order
        u = rng.random()
        acc = 0.0
        for v, p in self.points:
            acc += p
            if u < acc:
                return v
        return self.points[-1][0]


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def mean(self) -> float:
        return (self.lo + self.hi) / 2

    def support_min(self) -> float:
        return float(self.lo)

    def support_max(self) -> float:
        return float(self.hi)

    def expected_excess(self, sigma: float) -> float:
        if sigma >= self.hi:
            return 0.0
        if sigma <= self.lo:
            return self.mean() - sigma
        return (self.hi - sigma) ** 2 / (2 * (self.hi - self.lo))

    def sample(self, rng: np.random.Generator) -> float:
        return float(self.lo + (self.hi - self.lo) * rng.random())


Distribution = Union[PointMass, FiniteSupport, Uniform]


# --- valuations ----------------------------------------------------------------


@dataclass(frozen=True)
class Value:
    v: float


@dataclass(frozen=True)
class Cost:
    c: float


@dataclass(frozen=True)
class Inspectable:
    """Unknown value with inspection cost ``r`` and value distribution ``dist``.

    ``drawn`` holds the realized (still hidden) value once types are realized.
    """

    r: float
    dist: Distribution
    drawn: float | None = None

    def with_draw(self, v: float) -> "Inspectable":
        return Inspectable(self.r, self.dist, float(v))


Valuation = Union[Value, Cost, Inspectable]


@dataclass(frozen=True)
class RandomValue:
    dist: Distribution


@dataclass(frozen=True)
class RandomCost:
    dist: Distribution


EntryPrior = Union[Value, Cost, Inspectable, RandomValue, RandomCost]


def realized_value(val: Valuation) -> float:
    """Engine-facing value: ``v``, ``-c``, or the drawn inspectable value."""
    if isinstance(val, Value):
        return float(val.v)
    if isinstance(val, Cost):
        return -float(val.c)
    if isinstance(val, Inspectable):
        if val.drawn is None:
            raise ValueError("inspectable valuation has no drawn value")
        return float(val.drawn)
    raise TypeError(f"not a valuation: {val!r}")


def report_value(val: Valuation) -> float:
    """Value in report space: values for bidders, positive costs for askers."""
    if isinstance(val, Cost):
        return float(val.c)
    return realized_value(val)


# --- graph -------------------------------------------------------------------


@dataclass(frozen=True)
class MarketGraph:
    agents: tuple
    groups: tuple
    max_group_size: int = 2
    side_labels: Mapping[AgentId, Side] | None = None

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "groups", tuple(make_group(g) for g in self.groups))
        if self.side_labels is not None:
            object.__setattr__(
                self,
                "side_labels",
                {a: Side(s) for a, s in self.side_labels.items()},
            )

    def incident(self, agent: AgentId) -> tuple:
        return tuple(g for g in self.groups if agent in g)

    def incidences(self) -> list:
        return sorted((a, g) for g in self.groups for a in g)

    def side(self, agent: AgentId) -> Side | None:
        if self.side_labels is None:
            return None
        return self.side_labels.get(agent)

    def edges(self) -> tuple:
        return tuple(g for g in self.groups if len(g) == 2)

    def bidders(self) -> list:
        return [a for a in self.agents if self.side(a) is Side.BIDDER]

    def askers(self) -> list:
        return [a for a in self.agents if self.side(a) is Side.ASKER]

    def bidder_asker(self, group: Group) -> tuple:
        """Return ``(bidder, asker)`` for a labelled edge."""
        a, b = group
        if self.side(a) is Side.BIDDER:
            return a, b
        return b, a


def complete_bipartite(bidders: Iterable[str], askers: Iterable[str]) -> MarketGraph:
    bidders, askers = list(bidders), list(askers)
    labels = {b: Side.BIDDER for b in bidders} | {a: Side.ASKER for a in askers}
    groups = [make_group((b, a)) for b in bidders for a in askers]
    return MarketGraph(tuple(bidders + askers), tuple(groups), 2, labels)


def complete_graph(agents: Iterable[str]) -> MarketGraph:
    agents = list(agents)
    return MarketGraph(tuple(agents), tuple(make_group(p) for p in combinations(agents, 2)))


# --- types and priors ----------------------------------------------------------


@dataclass(frozen=True)
class AgentType:
    """The private view one agent has of its own type."""

    owner: AgentId
    entries: Mapping[Group, Valuation]
    side: Side | None = None

    def groups(self) -> list:
        return sorted(self.entries)


@dataclass(frozen=True, eq=False)
class TypeProfile:
    entries: Mapping[Incidence, Valuation]

    def __eq__(self, other):
        return isinstance(other, TypeProfile) and dict(self.entries) == dict(other.entries)

    def valuation(self, agent: AgentId, group: Group) -> Valuation:
        try:
            return self.entries[(agent, group)]
        except KeyError:
            raise KeyError(f"no valuation for agent {agent!r} on group {group!r}") from None

    def value(self, agent: AgentId, group: Group) -> float:
        return realized_value(self.valuation(agent, group))

    def agent_type(self, agent: AgentId, side: Side | None = None) -> AgentType:
        """Own entries only; inspectable draws stay hidden until inspection."""
        own = {
            g: Inspectable(val.r, val.dist) if isinstance(val, Inspectable) else val
            for (a, g), val in self.entries.items()
            if a == agent
        }
        return AgentType(agent, own, side)

    def replace(self, updates: Mapping[Incidence, Valuation]) -> "TypeProfile":
        return TypeProfile({**self.entries, **updates})

    def to_dict(self) -> list:
        return [
            {"agent": a, "group": list(g), "valuation": valuation_to_json(val)}
            for (a, g), val in sorted(self.entries.items())
        ]

    @classmethod
    def from_dict(cls, items: list) -> "TypeProfile":
        return cls(
            {
                (it["agent"], make_group(it["group"])): valuation_from_json(it["valuation"])
                for it in items
            }
        )


def surplus(profile: TypeProfile, group: Group) -> float:
    """Sum of realized member values on ``group`` (costs enter negated)."""
    return math.fsum(profile.value(a, group) for a in make_group(group))


@dataclass(frozen=True)
class Degenerate:
    profile: TypeProfile


@dataclass(frozen=True)
class IndependentEntries:
    entries: Mapping[Incidence, EntryPrior]


@dataclass(frozen=True)
class ExplicitJoint:
    outcomes: tuple  # ((TypeProfile, probability), ...)


TypePrior = Union[Degenerate, IndependentEntries, ExplicitJoint]


def _draw_entry(entry, rng: np.random.Generator) -> Valuation:
    if isinstance(entry, RandomValue):
        return Value(entry.dist.sample(rng))
    if isinstance(entry, RandomCost):
        return Cost(entry.dist.sample(rng))
    if isinstance(entry, Inspectable):
        if entry.drawn is not None:
            return entry
        return entry.with_draw(entry.dist.sample(rng))
    return entry


def _complete_draws(profile: TypeProfile, rng: np.random.Generator) -> TypeProfile:
    missing = {
        key: _draw_entry(val, rng)
        for key, val in sorted(profile.entries.items())
        if isinstance(val, Inspectable) and val.drawn is None
    }
    return profile.replace(missing) if missing else profile


def realize_types(prior: TypePrior, seed: int) -> TypeProfile:
    """Draw a type profile; a pure function of ``(prior, seed)``."""
    rng = make_rng(seed)
    if isinstance(prior, Degenerate):
        return _complete_draws(prior.profile, rng)
    if isinstance(prior, IndependentEntries):
        return TypeProfile(
            {key: _draw_entry(entry, rng) for key, entry in sorted(prior.entries.items())}
        )
    if isinstance(prior, ExplicitJoint):
        u = rng.random()
        acc = 0.0
        chosen = prior.outcomes[-1][0]
        for profile, p in prior.outcomes:
            acc += p
            if u < acc:
                chosen = profile
                break
        return _complete_draws(chosen, rng)
    raise TypeError(f"unknown prior {prior!r}")


def prior_profiles(prior: TypePrior) -> list:
    """Profiles named by the prior (the support for Degenerate/ExplicitJoint)."""
    if isinstance(prior, Degenerate):
        return [prior.profile]
    if isinstance(prior, ExplicitJoint):
        return [p for p, _ in prior.outcomes]
    return []


# --- scenario ----------------------------------------------------------------


class PaymentRule(str, enum.Enum):
    PAY_YOUR_BID = "payYourBid"
    QUARTER_REBATE = "quarterRebate"


@dataclass(frozen=True)
class Scenario:
    graph: MarketGraph
    prior: TypePrior
    payment_rule: PaymentRule = PaymentRule.PAY_YOUR_BID
    p_max: float | None = None
    default_seed: int = 0


@dataclass(frozen=True)
class Violation:
    invariant: str
    location: str

    def __str__(self):
        return f"{self.invariant} @ {self.location}"


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def messages(self) -> list:
        return [str(v) for v in self.violations]


def _check_distribution(dist, loc: str, out: list, nonneg: bool) -> None:
    if isinstance(dist, FiniteSupport):
        if not dist.points:
            out.append(Violation("empty finite support", loc))
            return
        if any(p < 0 for _, p in dist.points):
            out.append(Violation("negative probability", loc))
        if abs(dist.total_probability() - 1.0) > PROB_TOL:
            out.append(Violation("probabilities must sum to 1", loc))
    elif isinstance(dist, Uniform):
        if dist.lo > dist.hi:
            out.append(Violation("uniform lo > hi", loc))
    elif not isinstance(dist, PointMass):
        out.append(Violation("unknown distribution", loc))
        return
    if nonneg and dist.support_min() < 0:
        out.append(Violation("inspection distribution has negative support", loc))


def _check_entry(entry, agent, group, graph: MarketGraph, rebate: bool, out: list) -> None:
    loc = f"{agent}/{group_key(group)}"
    if isinstance(entry, (Cost, RandomCost)):
        if not rebate or graph.side(agent) is not Side.ASKER:
            out.append(Violation("cost entries only allowed for askers in rebate scenarios", loc))
    if isinstance(entry, Inspectable):
        if entry.r < 0:
            out.append(Violation("inspection cost r < 0", loc))
        _check_distribution(entry.dist, loc, out, nonneg=True)
        if entry.dist.mean() < entry.r:
            out.append(Violation("mean(D) < r", loc))
    elif isinstance(entry, (RandomValue, RandomCost)):
        _check_distribution(entry.dist, loc, out, nonneg=False)
    elif not isinstance(entry, (Value, Cost)):
        out.append(Violation("unknown valuation kind", loc))


def _check_coverage(keys, graph: MarketGraph, where: str, out: list) -> None:
    expected = set(graph.incidences())
    got = set(keys)
    for a, g in sorted(expected - got):
        out.append(Violation("missing valuation", f"{where}:{a}/{group_key(g)}"))
    for a, g in sorted(got - expected, key=str):
        out.append(Violation("valuation for non-incident group", f"{where}:{a}/{group_key(g)}"))


def validate_scenario(s: Scenario) -> ValidationResult:
    out: list = []
    g = s.graph
    agents = set(g.agents)
    if len(agents) != len(g.agents):
        out.append(Violation("duplicate agent ids", "graph.agents"))
    if g.max_group_size < 2:
        out.append(Violation("maxGroupSize must be >= 2", "graph.maxGroupSize"))
    if len(set(g.groups)) != len(g.groups):
        out.append(Violation("duplicate groups", "graph.groups"))
    for grp in g.groups:
        loc = f"graph.groups[{group_key(grp)}]"
        if len(set(grp)) != len(grp):
            out.append(Violation("repeated member in group", loc))
        if not 2 <= len(grp) <= g.max_group_size:
            out.append(Violation("group size outside [2, maxGroupSize]", loc))
        for a in grp:
            if a not in agents:
                out.append(Violation("group member not in agents", f"{loc}:{a}"))

    rebate = s.payment_rule is PaymentRule.QUARTER_REBATE
    if g.side_labels is not None:
        for a in g.agents:
            if a not in g.side_labels:
                out.append(Violation("agent missing side label", f"graph.sideLabels:{a}"))
        for a in g.side_labels:
            if a not in agents:
                out.append(Violation("side label for unknown agent", f"graph.sideLabels:{a}"))
        for grp in g.groups:
            if len(grp) == 2:
                sides = {g.side(a) for a in grp}
                if sides != {Side.BIDDER, Side.ASKER}:
                    out.append(
                        Violation("edge must join one Bidder and one Asker", f"graph.groups[{group_key(grp)}]")
                    )
    if rebate:
        if g.side_labels is None:
            out.append(Violation("rebate requires side labels", "graph.sideLabels"))
        for grp in g.groups:
            if len(grp) != 2:
                out.append(Violation("rebate requires size-2 groups", f"graph.groups[{group_key(grp)}]"))

    if s.p_max is not None and not s.p_max > 0:
        out.append(Violation("pMax must be > 0", "clock.pMax"))

    prior = s.prior
    if isinstance(prior, Degenerate):
        profiles = [("prior.profile", prior.profile)]
    elif isinstance(prior, ExplicitJoint):
        profiles = [(f"prior.outcomes[{n}]", p) for n, (p, _) in enumerate(prior.outcomes)]
        if not prior.outcomes:
            out.append(Violation("explicit joint prior is empty", "prior"))
        elif abs(math.fsum(p for _, p in prior.outcomes) - 1.0) > PROB_TOL:
            out.append(Violation("probabilities must sum to 1", "prior.outcomes"))
    elif isinstance(prior, IndependentEntries):
        profiles = []
        _check_coverage(prior.entries.keys(), g, "prior.entries", out)
        for (a, grp), entry in sorted(prior.entries.items()):
            _check_entry(entry, a, grp, g, rebate, out)
    else:
        profiles = []
        out.append(Violation("unknown prior kind", "prior"))
    for where, profile in profiles:
        _check_coverage(profile.entries.keys(), g, where, out)
        for (a, grp), entry in sorted(profile.entries.items()):
            _check_entry(entry, a, grp, g, rebate, out)
    return ValidationResult(tuple(out))


# --- JSON ----------------------------------------------------------------------


def distribution_to_json(d: Distribution) -> dict:
    if isinstance(d, PointMass):
        return {"pointMass": d.v}
    if isinstance(d, FiniteSupport):
        return {"finite": [[v, p] for v, p in d.points]}
    if isinstance(d, Uniform):
        return {"uniform": [d.lo, d.hi]}
    raise TypeError(d)


def distribution_from_json(obj) -> Distribution:
    if isinstance(obj, (int, float)):
        return PointMass(float(obj))
    if "pointMass" in obj:
        return PointMass(float(obj["pointMass"]))
    if "finite" in obj:
        return FiniteSupport(tuple((float(v), float(p)) for v, p in obj["finite"]))
    if "uniform" in obj:
        lo, hi = obj["uniform"]
        return Uniform(float(lo), float(hi))
    raise ValueError(f"unknown distribution spec: {obj!r}")


def valuation_to_json(val: EntryPrior) -> dict:
    if isinstance(val, Value):
        return {"value": val.v}
    if isinstance(val, Cost):
        return {"cost": val.c}
    if isinstance(val, RandomValue):
        return {"value": distribution_to_json(val.dist)}
    if isinstance(val, RandomCost):
        return {"cost": distribution_to_json(val.dist)}
    if isinstance(val, Inspectable):
        spec = {"cost": val.r, "dist": distribution_to_json(val.dist)}
        if val.drawn is not None:
            spec["drawn"] = val.drawn
        return {"inspect": spec}
    raise TypeError(val)


def valuation_from_json(obj: dict) -> EntryPrior:
    if "value" in obj:
        x = obj["value"]
        return Value(float(x)) if isinstance(x, (int, float)) else RandomValue(distribution_from_json(x))
    if "cost" in obj:
        x = obj["cost"]
        return Cost(float(x)) if isinstance(x, (int, float)) else RandomCost(distribution_from_json(x))
    if "inspect" in obj:
        spec = obj["inspect"]
        drawn = spec.get("drawn")
        return Inspectable(
            float(spec["cost"]),
            distribution_from_json(spec["dist"]),
            None if drawn is None else float(drawn),
        )
    raise ValueError(f"unknown valuation spec: {obj!r}")


def _entries_from_json(items: list) -> dict:
    return {
        (it["agent"], make_group(it["group"])): valuation_from_json(it["valuation"])
        for it in items
    }


def prior_to_json(prior: TypePrior) -> dict:
    if isinstance(prior, Degenerate):
        return {"kind": "degenerate", "entries": prior.profile.to_dict()}
    if isinstance(prior, IndependentEntries):
        return {"kind": "independent", "entries": TypeProfile(prior.entries).to_dict()}
    if isinstance(prior, ExplicitJoint):
        return {
            "kind": "explicitJoint",
            "entries": [{"probability": p, "profile": prof.to_dict()} for prof, p in prior.outcomes],
        }
    raise TypeError(prior)


def prior_from_json(obj: dict) -> TypePrior:
    kind = obj["kind"]
    if kind == "degenerate":
        return Degenerate(TypeProfile(_entries_from_json(obj["entries"])))
    if kind == "independent":
        return IndependentEntries(_entries_from_json(obj["entries"]))
    if kind == "explicitJoint":
        return ExplicitJoint(
            tuple(
                (TypeProfile(_entries_from_json(o["profile"])), float(o["probability"]))
                for o in obj["entries"]
            )
        )
    raise ValueError(f"unknown prior kind: {kind!r}")


def scenario_to_json(s: Scenario) -> dict:
    graph = {
        "agents": list(s.graph.agents),
        "groups": [list(g) for g in s.graph.groups],
        "maxGroupSize": s.graph.max_group_size,
    }
    if s.graph.side_labels is not None:
        graph["sideLabels"] = {a: side.value for a, side in s.graph.side_labels.items()}
    clock = {} if s.p_max is None else {"pMax": s.p_max}
    return {
        "graph": graph,
        "prior": prior_to_json(s.prior),
        "paymentRule": s.payment_rule.value,
        "clock": clock,
        "defaultSeed": s.default_seed,
    }


def scenario_from_json(obj: dict) -> Scenario:
    try:
        g = obj["graph"]
        graph = MarketGraph(
            tuple(g["agents"]),
            tuple(make_group(x) for x in g["groups"]),
            int(g.get("maxGroupSize", 2)),
            g.get("sideLabels"),
        )
        clock = obj.get("clock") or {}
        p_max = clock.get("pMax")
        return Scenario(
            graph=graph,
            prior=prior_from_json(obj["prior"]),
            payment_rule=PaymentRule(obj.get("paymentRule", "payYourBid")),
            p_max=None if p_max is None else float(p_max),
            default_seed=int(obj.get("defaultSeed", 0)),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed scenario: {exc}") from exc
