"""One run of the Marshallian Match.

The sweep is simulated in price space from +inf down to 0.  Between
events every group's bid sum is constant, so the next thing that happens
is either a schedule breakpoint, an inspection trigger, or the highest
remaining bid sum being reached by the price.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

from ._rng import make_rng, pick
from .clock import PriceSchedule
from .market import (
    Group,
    Inspectable,
    MarketGraph,
    PaymentRule,
    TypeProfile,
    group_key,
)


@dataclass(frozen=True)
class MatchRecord:
    group: Group
    price: float
    time: float
    bids: Mapping
    payments: Mapping
    rebates: Mapping


@dataclass(frozen=True)
class Transcript:
    matches: tuple
    payments: Mapping  # net of rebates
    group_price: Mapping  # total net payment on the agent's matched group
    inspected: frozenset  # {(agent, group)}
    matched: frozenset  # {(agent, group)}
    inspection_costs: Mapping
    utilities: Mapping
    welfare: float
    seed: int

    def group_of(self, agent) -> Group | None:
        for a, g in self.matched:
            if a == agent:
                return g
        return None

    def matched_groups(self) -> list:
        return [m.group for m in self.matches]

    def to_dict(self) -> dict:
        return {
            "matches": [
                {
                    "group": list(m.group),
                    "price": m.price,
                    "time": m.time,
                    "bids": dict(m.bids),
                    "payments": dict(m.payments),
                    "rebates": dict(m.rebates),
                }
                for m in self.matches
            ],
            "payments": dict(self.payments),
            "groupPrice": dict(self.group_price),
            "inspected": sorted([a, group_key(g)] for a, g in self.inspected),
            "matched": sorted([a, group_key(g)] for a, g in self.matched),
            "inspectionCosts": dict(self.inspection_costs),
            "utilities": dict(self.utilities),
            "welfare": self.welfare,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def settle_edge(group: Group, bids: Mapping, rule: PaymentRule) -> tuple:
    """Net payments and rebates for a matched group.

    Askers enter with their negated ask, so "payment" -a means receiving a.
    """
    rule = PaymentRule(rule)
    total = math.fsum(bids[a] for a in group)
    if total < 0:
        raise ValueError(f"bid sum {total} < 0 on {group}: no crossing possible")
    if rule is PaymentRule.PAY_YOUR_BID:
        return {a: float(bids[a]) for a in group}, {a: 0.0 for a in group}
    if len(group) != 2:
        raise ValueError("quarter rebate applies only to pairs")
    rebate = total / 4
    return {a: bids[a] - rebate for a in group}, {a: rebate for a in group}


def compute_utilities(transcript: Transcript, types: TypeProfile) -> dict:
    """Matched value minus net payment minus inspection costs, per agent."""
    agents = set(transcript.payments) | set(transcript.inspection_costs)
    util = {a: 0.0 for a in agents}
    for a, g in transcript.matched:
        util[a] += types.value(a, g)
    for a in agents:
        util[a] -= transcript.payments.get(a, 0.0) + transcript.inspection_costs.get(a, 0.0)
    return util


def default_p_max(schedules: Mapping) -> float:
    return 1.0 + sum(s.max_abs_bid() for s in schedules.values())


def run_schedules(
    graph: MarketGraph,
    types: TypeProfile,
    schedules: Mapping,
    rule: PaymentRule = PaymentRule.PAY_YOUR_BID,
    seed: int = 0,
    clock: PriceSchedule | None = None,
) -> Transcript:
    """Run the mechanism on precommitted bid schedules."""
    rule = PaymentRule(rule)
    for g in graph.groups:
        for a in g:
            if a not in schedules or g not in schedules[a].per_group:
                raise ValueError(f"no bid schedule for agent {a!r} on group {group_key(g)}")
    p_max = clock.p_max if clock is not None and clock.p_max is not None else default_p_max(schedules)
    sched_clock = PriceSchedule(p_max)
    for s in schedules.values():
        if not s.is_defined_from(p_max):
            raise ValueError(f"schedule of {s.owner!r} undefined above its first breakpoint (< pMax {p_max})")

    rng = make_rng(seed)
    active = set(graph.agents)
    override: dict = {}
    inspected: dict = {}
    costs = {a: 0.0 for a in graph.agents}
    matches: list = []
    pending = sorted(
        ((tr.trigger_price, a, tr) for a, s in schedules.items() for tr in s.reactive),
        key=lambda x: (-x[0], x[1], x[2].group),
    )
    # per-agent breakpoint prices, for event scheduling
    thresholds = {a: sorted(set(s.thresholds()), reverse=True) for a, s in schedules.items()}

    def bid(a, g, price):
        key = (a, g)
        if key in override:
            return override[key]
        return schedules[a].bid_at(g, price)

    def live_groups():
        return [g for g in graph.groups if all(a in active for a in g)]

    def bid_sum(g, price):
        return math.fsum(bid(a, g, price) for a in g)

    def inspect(a, g):
        val = types.valuation(a, g)
        if not isinstance(val, Inspectable):
            raise ValueError(f"agent {a!r} cannot inspect non-inspectable group {group_key(g)}")
        if (a, g) not in inspected:
            inspected[(a, g)] = val.r
            costs[a] += val.r
        return val

    def match(g, price):
        bids = {a: bid(a, g, price) for a in g}
        for a in g:
            if isinstance(types.valuation(a, g), Inspectable):
                inspect(a, g)
        payments, rebates = settle_edge(g, bids, rule)
        matches.append(MatchRecord(g, price, sched_clock.time_at_price(price), bids, payments, rebates))
        active.difference_update(g)

    def fire_crossings(price):
        while True:
            cands = sorted(g for g in live_groups() if bid_sum(g, price) >= price)
            if not cands:
                return
            match(pick(cands, rng), price)

    price = math.inf
    while True:
        while pending and pending[0][0] >= price:
            _, a, tr = pending.pop(0)
            # a removed group takes its triggers with it
            if not all(m in active for m in tr.group):
                continue
            val = inspect(a, tr.group)
            override[(a, tr.group)] = tr.post_bid(val.drawn)
            fire_crossings(price)
        fire_crossings(price)
        if price <= 0:
            break
        nxt = 0.0
        for a in active:
            for t in thresholds.get(a, ()):
                if t < price:
                    nxt = max(nxt, t)
                    break
        for t, _, tr in pending:
            if t < price and all(m in active for m in tr.group):
                nxt = max(nxt, t)
                break
        top = max((bid_sum(g, price) for g in live_groups()), default=-math.inf)
        price = top if top > nxt else nxt

    payments = {a: 0.0 for a in graph.agents}
    group_price = {a: 0.0 for a in graph.agents}
    matched = set()
    for m in matches:
        total = math.fsum(m.payments.values())
        for a in m.group:
            payments[a] = m.payments[a]
            group_price[a] = total
            matched.add((a, m.group))
    partial = Transcript(
        tuple(matches), payments, group_price, frozenset(inspected), frozenset(matched),
        costs, {}, 0.0, int(seed),
    )
    util = compute_utilities(partial, types)
    utilities = {a: util[a] for a in graph.agents}
    welfare = math.fsum(list(utilities.values()) + list(payments.values()))
    return Transcript(
        tuple(matches), payments, group_price, frozenset(inspected), frozenset(matched),
        costs, utilities, welfare, int(seed),
    )


def run_match(
    graph: MarketGraph,
    types: TypeProfile,
    strategies,
    rule: PaymentRule = PaymentRule.PAY_YOUR_BID,
    seed: int = 0,
    clock: PriceSchedule | None = None,
) -> Transcript:
    """Build every agent's schedule from its own type, then run."""
    return run_schedules(graph, types, strategies.schedules(types, graph), rule, seed, clock)
