"""Named strategies, deviation families, and strategy profiles.

A strategy is a function from an agent's own :class:`AgentType` to a
:class:`BidSchedule`.  Constructors never see anyone else's type.
Report space (bids for bidders, positive asks for askers) is converted to
engine space by :func:`to_engine_bid`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import partial
from itertools import product
from typing import Callable, Mapping

from ._rng import make_rng
from .market import (
    AgentId,
    AgentType,
    Cost,
    Inspectable,
    MarketGraph,
    Side,
    Value,
    make_group,
    parse_group_key,
    report_value,
)
from .pandora import strike_of
from .schedule import INF, BidSchedule, InspectTrigger, constant_schedule

Strategy = Callable[[AgentType], BidSchedule]


def to_engine_bid(side: Side | None, amount: float) -> float:
    """Asks are submitted to the engine as negated bids."""
    return -amount if side is Side.ASKER else amount


@dataclass(frozen=True)
class StrategyProfile:
    constructors: Mapping[AgentId, Strategy]

    @classmethod
    def uniform(cls, graph: MarketGraph, strategy: Strategy) -> "StrategyProfile":
        return cls({a: strategy for a in graph.agents})

    def replace(self, updates: Mapping[AgentId, Strategy]) -> "StrategyProfile":
        return StrategyProfile({**self.constructors, **updates})

    def schedules(self, types, graph: MarketGraph) -> dict:
        out = {}
        for a in graph.agents:
            ctor = self.constructors.get(a)
            if ctor is None:
                if graph.incident(a):
                    raise ValueError(f"no strategy for agent {a!r}")
                out[a] = BidSchedule(a)
                continue
            sched = ctor(types.agent_type(a, graph.side(a)))
            if sched.owner != a:
                raise ValueError(f"strategy for {a!r} returned a schedule owned by {sched.owner!r}")
            out[a] = sched
        return out


# --- named strategies ------------------------------------------------------------


def truthful(t: AgentType) -> BidSchedule:
    bids = {}
    for g, val in t.entries.items():
        if isinstance(val, Inspectable):
            raise ValueError(f"truthful bidding is undefined before inspecting {g}")
        if isinstance(val, Cost):
            bids[g] = -val.c
        else:
            bids[g] = val.v
    return constant_schedule(t.owner, bids)


def half_value(t: AgentType) -> BidSchedule:
    bids = {}
    for g, val in t.entries.items():
        if not isinstance(val, Value):
            raise ValueError(f"half-value needs plain values, got {val!r} on {g}")
        if val.v < 0:
            raise ValueError(f"half-value needs nonnegative values, got {val.v} on {g}")
        bids[g] = val.v / 2
    return constant_schedule(t.owner, bids)


def zero_then_inspect(t: AgentType, rule: str = "value") -> BidSchedule:
    """Bid 0 everywhere; at price sigma/2 inspect and rebid half the value.

    ``rule="covered"`` rebids half the covered call min(sigma, v) instead.
    """
    triggers = []
    for g, val in sorted(t.entries.items()):
        if not isinstance(val, Inspectable):
            raise ValueError(f"zero-then-inspect needs inspectable entries, got {val!r} on {g}")
        sigma = strike_of(val)
        if sigma < 0:
            raise ValueError(f"negative strike price {sigma} on {g}")
        triggers.append(InspectTrigger(g, sigma / 2, 0.5, rule, sigma))
    base = {g: ((INF, 0.0),) for g in t.entries}
    return BidSchedule(t.owner, base, tuple(triggers))


zero_then_inspect_covered = partial(zero_then_inspect, rule="covered")


def refusal(t: AgentType, bid: float = 0.0, ask: float = 4.0) -> BidSchedule:
    amount = ask if t.side is Side.ASKER else bid
    return constant_schedule(t.owner, {g: to_engine_bid(t.side, amount) for g in t.entries})


def _constant_report(t: AgentType, bids: Mapping) -> BidSchedule:
    own = {g: to_engine_bid(t.side, bids[g]) for g in t.entries if g in bids}
    return constant_schedule(t.owner, own, incident=t.entries.keys())


def constant(bids: Mapping) -> Strategy:
    """Constant report-space bids (asks for askers) keyed by group."""
    return partial(_constant_report, bids={make_group(g): float(b) for g, b in bids.items()})


def refusal_profile(graph: MarketGraph, bid: float = 0.0, ask: float = 4.0) -> StrategyProfile:
    return StrategyProfile.uniform(graph, partial(refusal, bid=bid, ask=ask))


def pairwise_truthful(base: StrategyProfile, i: AgentId, j: AgentId, graph: MarketGraph) -> StrategyProfile:
    if make_group((i, j)) not in graph.groups:
        raise ValueError(f"{i!r} and {j!r} are not a feasible pair")
    return base.replace({i: truthful, j: truthful})


STRATEGIES = {
    "truthful": truthful,
    "halfValue": half_value,
    "zeroThenInspect": zero_then_inspect,
    "zeroThenInspectCovered": zero_then_inspect_covered,
    "refusal": refusal,
}


def resolve_strategy(spec: str) -> Strategy:
    """Look up a strategy id; ``constant:{"A,B": 3}`` builds a constant plan."""
    if spec.startswith("constant:"):
        raw = json.loads(spec[len("constant:"):])
        return constant({parse_group_key(k): v for k, v in raw.items()})
    try:
        return STRATEGIES[spec]
    except KeyError:
        raise ValueError(f"unknown strategy id {spec!r}") from None


# --- deviation families ----------------------------------------------------------

# (scale, offset) pairs: -2, -1, -0.5, 0, v/4, v/2, v, 3v/2, v + 2
DEFAULT_GRID = ((0, -2), (0, -1), (0, -0.5), (0, 0), (0.25, 0), (0.5, 0), (1, 0), (1.5, 0), (1, 2))


@dataclass(frozen=True)
class DeviationFamily:
    kind: str  # halfValue | zeroThenInspect | pairwiseTruthful | constantGrid
    bids: tuple | None = None  # absolute report-space bids (bidders, unlabelled agents)
    asks: tuple | None = None  # absolute asks (askers)
    cap: int = 200

    KINDS = ("halfValue", "zeroThenInspect", "pairwiseTruthful", "constantGrid")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown deviation family {self.kind!r}")

    def describe(self) -> str:
        if self.kind != "constantGrid":
            return self.kind
        return f"constantGrid(bids={self.bids}, asks={self.asks}, cap={self.cap})"

    def _levels(self, side: Side | None):
        absolute = self.asks if side is Side.ASKER else self.bids
        if absolute is not None:
            return tuple((0, float(x)) for x in absolute)
        return DEFAULT_GRID

    def strategies_for(self, agent: AgentId, graph: MarketGraph) -> list:
        if self.kind == "halfValue":
            return [half_value]
        if self.kind == "zeroThenInspect":
            return [zero_then_inspect]
        if self.kind == "pairwiseTruthful":
            return [truthful]
        groups = graph.incident(agent)
        if not groups:
            return []
        m = len(self._levels(graph.side(agent)))
        total = m ** len(groups)
        return [partial(grid_schedule, family=self, index=ix) for ix in _grid_indices(total, self.cap)]

    def pair_deviations(self, i: AgentId, j: AgentId, graph: MarketGraph) -> list:
        if self.kind != "constantGrid":
            s = self.strategies_for(i, graph)[0]
            return [(s, self.strategies_for(j, graph)[0])]
        si, sj = self.strategies_for(i, graph), self.strategies_for(j, graph)
        pairs = list(product(si, sj))
        if len(pairs) <= self.cap:
            return pairs
        return [pairs[ix] for ix in _grid_indices(len(pairs), self.cap)]


def _grid_indices(total: int, cap: int) -> list:
    if total <= cap:
        return list(range(total))
    rng = make_rng(total)
    chosen: set = set()
    while len(chosen) < cap:
        chosen.add(int(rng.integers(total)))
    return sorted(chosen)


def grid_schedule(t: AgentType, family: DeviationFamily, index: int) -> BidSchedule:
    """The ``index``-th constant plan of the family's grid for this agent."""
    levels = family._levels(t.side)
    m = len(levels)
    bids = {}
    for g in t.groups():
        scale, offset = levels[index % m]
        index //= m
        val = t.entries[g]
        if not scale:
            v = 0.0
        elif isinstance(val, Inspectable):
            v = val.dist.mean()
        else:
            v = report_value(val)
        amount = scale * v + offset
        if math.isnan(amount):
            raise ValueError("grid produced NaN bid")
        bids[g] = to_engine_bid(t.side, amount)
    return constant_schedule(t.owner, bids)


NONNEG_GRID = ((0, 0), (0.25, 0), (0.5, 0), (1, 0), (1.5, 0), (1, 2))


def random_grid_profile(graph: MarketGraph, seed: int, levels=DEFAULT_GRID) -> StrategyProfile:
    """Each agent draws one constant plan from the grid, per group."""
    rng = make_rng(seed)
    ctors = {}
    for a in graph.agents:
        groups = graph.incident(a)
        if not groups:
            continue
        index = int(rng.integers(len(levels) ** len(groups)))
        ctors[a] = partial(_levels_schedule, levels=tuple(levels), index=index)
    return StrategyProfile(ctors)


def _levels_schedule(t: AgentType, levels: tuple, index: int) -> BidSchedule:
    m = len(levels)
    bids = {}
    for g in t.groups():
        scale, offset = levels[index % m]
        index //= m
        val = t.entries[g]
        base = val.dist.mean() if isinstance(val, Inspectable) else report_value(val)
        bids[g] = to_engine_bid(t.side, scale * base + offset if scale else float(offset))
    return constant_schedule(t.owner, bids)
