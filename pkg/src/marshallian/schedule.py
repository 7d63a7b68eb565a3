"""Declarative bid plans: piecewise-constant schedules plus inspection triggers.

Bids live in engine space: bidders bid values, askers bid the negated ask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .market import AgentId, Group, make_group

INF = math.inf


@dataclass(frozen=True)
class InspectTrigger:
    """Inspect ``group`` when the price reaches ``trigger_price``, then rebid.

    The post-inspection bid is ``fraction * drawn`` under ``rule="value"`` and
    ``fraction * min(strike, drawn)`` under ``rule="covered"``.
    """

    group: Group
    trigger_price: float
    fraction: float = 0.5
    rule: str = "value"
    strike: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "group", make_group(self.group))
        if self.trigger_price < 0:
            raise ValueError("trigger price must be >= 0")
        if self.rule not in ("value", "covered"):
            raise ValueError(f"unknown post-inspection rule {self.rule!r}")
        if self.rule == "covered" and self.strike is None:
            raise ValueError("covered rule needs a strike price")

    def post_bid(self, drawn: float) -> float:
        if self.rule == "covered":
            return self.fraction * min(self.strike, drawn)
        return self.fraction * drawn


@dataclass(frozen=True)
class BidSchedule:
    """Per-group breakpoints ``((threshold, bid), ...)`` with thresholds
    strictly decreasing; the bid at price ``p`` comes from the last
    breakpoint whose threshold is ``>= p``.
    """

    owner: AgentId
    per_group: Mapping[Group, tuple] = field(default_factory=dict)
    reactive: tuple = ()

    def __post_init__(self):
        norm = {}
        for g, bps in self.per_group.items():
            bps = tuple((float(t), float(b)) for t, b in bps)
            if not bps:
                raise ValueError(f"empty schedule for group {g}")
            for (t0, _), (t1, _) in zip(bps, bps[1:]):
                if not t0 > t1:
                    raise ValueError("breakpoints must be strictly decreasing in price")
            if bps[-1][0] < 0:
                raise ValueError("breakpoint below price 0")
            norm[make_group(g)] = bps
        object.__setattr__(self, "per_group", norm)
        object.__setattr__(self, "reactive", tuple(self.reactive))

    def bid_at(self, group: Group, price: float) -> float:
        try:
            bps = self.per_group[group]
        except KeyError:
            raise ValueError(f"agent {self.owner!r} has no bid for group {group!r}") from None
        bid = bps[0][1]
        for t, b in bps:
            if t >= price:
                bid = b
            else:
                break
        return bid

    def is_defined_from(self, p_max: float) -> bool:
        """True if every group's schedule covers [0, p_max] without extension."""
        return all(bps[0][0] >= p_max for bps in self.per_group.values())

    def thresholds(self) -> list:
        return [t for bps in self.per_group.values() for t, _ in bps[1:]]

    def max_abs_bid(self) -> float:
        return max((abs(b) for bps in self.per_group.values() for _, b in bps), default=0.0)

    def to_dict(self) -> dict:
        return {
            "owner": self.owner,
            "perGroup": {
                ",".join(g): [[_num(t), b] for t, b in bps] for g, bps in sorted(self.per_group.items())
            },
            "reactive": [
                {
                    "group": list(tr.group),
                    "triggerPrice": _num(tr.trigger_price),
                    "fraction": tr.fraction,
                    "rule": tr.rule,
                    "strike": tr.strike,
                }
                for tr in self.reactive
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "BidSchedule":
        per_group = {
            make_group(k.split(",")): tuple((_unnum(t), float(b)) for t, b in bps)
            for k, bps in obj["perGroup"].items()
        }
        reactive = tuple(
            InspectTrigger(
                tuple(tr["group"]),
                _unnum(tr["triggerPrice"]),
                tr["fraction"],
                tr["rule"],
                tr["strike"],
            )
            for tr in obj.get("reactive", ())
        )
        return cls(obj["owner"], per_group, reactive)


def _num(x: float):
    return "inf" if math.isinf(x) else x


def _unnum(x) -> float:
    return INF if x == "inf" else float(x)


def constant_schedule(owner: AgentId, bids: Mapping, incident=None) -> BidSchedule:
    """Constant bid per group at every price.

    If ``incident`` is given, every incident group must have a bid.
    """
    bids = {make_group(g): float(b) for g, b in bids.items()}
    if incident is not None:
        missing = [g for g in incident if make_group(g) not in bids]
        if missing:
            raise ValueError(f"agent {owner!r} missing bids for groups {missing}")
    return BidSchedule(owner, {g: ((INF, b),) for g, b in bids.items()})
