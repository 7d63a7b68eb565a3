"""Ground-truth matchings: exact optimum, greedy, and expected OPT."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._rng import make_rng, pick
from .market import Inspectable, Scenario, TypeProfile, make_group, surplus
from .pandora import covered_call, strike_of
from .sampling import draws, mean_stderr

MAX_GROUPS = 24


@dataclass(frozen=True)
class WeightedInstance:
    groups: tuple
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(make_group(g) for g in self.groups))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.groups) != len(self.weights):
            raise ValueError("one weight per group")
        if not all(math.isfinite(w) for w in self.weights):
            raise ValueError("weights must be finite")

    @classmethod
    def from_surplus(cls, groups, types: TypeProfile) -> "WeightedInstance":
        groups = tuple(groups)
        return cls(groups, tuple(surplus(types, g) for g in groups))

    @classmethod
    def from_covered_calls(cls, groups, types: TypeProfile) -> "WeightedInstance":
        """Weights sum of member covered calls; plain values count as-is."""
        groups = tuple(groups)
        ws = []
        for g in groups:
            total = []
            for a in g:
                val = types.valuation(a, g)
                if isinstance(val, Inspectable):
                    total.append(covered_call(val.drawn, strike_of(val)))
                else:
                    total.append(types.value(a, g))
            ws.append(math.fsum(total))
        return cls(groups, tuple(ws))

    def weight_of(self, matching) -> float:
        lookup = dict(zip(self.groups, self.weights))
        return math.fsum(lookup[g] for g in matching)


def _masks(groups) -> tuple:
    index = {a: n for n, a in enumerate(sorted({a for g in groups for a in g}))}
    return tuple(sum(1 << index[a] for a in g) for g in groups)


def max_weight_matching(inst: WeightedInstance) -> tuple:
    """Exact maximum-weight set of pairwise disjoint groups.

    Depth-first branch and bound; nonpositive groups are never useful.
    """
    if len(inst.groups) > MAX_GROUPS:
        raise ValueError(f"{len(inst.groups)} groups exceeds the exhaustive budget of {MAX_GROUPS}")
    items = sorted(
        ((w, g, m) for g, w, m in zip(inst.groups, inst.weights, _masks(inst.groups)) if w > 0),
        key=lambda x: (-x[0], x[1]),
    )
    suffix = [0.0] * (len(items) + 1)
    for n in range(len(items) - 1, -1, -1):
        suffix[n] = suffix[n + 1] + items[n][0]

    best_w, best = 0.0, ()
    chosen: list = []

    def dfs(n: int, used: int, total: float):
        nonlocal best_w, best
        if total > best_w:
            best_w, best = total, tuple(chosen)
        if n == len(items) or total + suffix[n] <= best_w:
            return
        w, g, m = items[n]
        if not used & m:
            chosen.append(g)
            dfs(n + 1, used | m, total + w)
            chosen.pop()
        dfs(n + 1, used, total)

    dfs(0, 0, 0.0)
    matching = tuple(sorted(best))
    return matching, inst.weight_of(matching)


def greedy_matching(inst: WeightedInstance, tie_seed: int = 0) -> tuple:
    """Highest weight first, skipping groups that overlap earlier picks.

    Equal weights are broken with the same uniform draw the engine uses for
    simultaneous crossings, so a truthful run and this oracle agree seed for
    seed.
    """
    rng = make_rng(tie_seed)
    remaining = {g: w for g, w in zip(inst.groups, inst.weights) if w > 0}
    taken: set = set()
    matching = []
    while True:
        live = {g: w for g, w in remaining.items() if not taken.intersection(g)}
        if not live:
            break
        top = max(live.values())
        g = pick(sorted(h for h, w in live.items() if w == top), rng)
        matching.append(g)
        taken.update(g)
        del remaining[g]
    return tuple(matching), inst.weight_of(matching)


def expected_opt(scenario: Scenario, samples: int = 1000, seed: int = 0, weights: str = "surplus") -> tuple:
    """(estimate, stderr) of the expected optimal matching weight.

    ``weights="coveredCall"`` uses covered-call group weights, the upper
    bound on optimal welfare when values must be inspected.
    """
    build = {
        "surplus": WeightedInstance.from_surplus,
        "coveredCall": WeightedInstance.from_covered_calls,
    }[weights]
    ds = draws(scenario.prior, samples, seed)
    vals = [max_weight_matching(build(scenario.graph.groups, d.types))[1] for d in ds]
    return mean_stderr(vals, [d.weight for d in ds], ds.exact)
