"""Exhaustive pure-strategy equilibria over a finite shading grid.

Each agent picks one factor lambda and bids lambda times its value on every
incident group.  All profiles are run once into a payoff table; a profile
is a grid equilibrium when no agent gains more than ``tol`` by switching
factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .engine import run_schedules
from .market import Scenario, TypeProfile, Value
from .oracles import WeightedInstance, max_weight_matching
from .schedule import constant_schedule

SHADING = (0.0, 0.25, 0.5, 0.75, 1.0)


def shaded(t, lam: float):
    """Bid ``lam`` times the value on every incident group."""
    bids = {}
    for g, val in t.entries.items():
        if not isinstance(val, Value) or val.v < 0:
            raise ValueError("shading needs nonnegative plain values")
        bids[g] = lam * val.v
    return constant_schedule(t.owner, bids)


@dataclass(frozen=True)
class GridEquilibrium:
    factors: tuple  # one per agent, in graph.agents order
    welfare: float


@dataclass(frozen=True)
class GridGame:
    agents: tuple
    levels: tuple
    utilities: dict  # factor index tuple -> per-agent utilities
    welfare: dict
    opt: float

    def equilibria(self, tol: float = 1e-9) -> list:
        out = []
        m = len(self.levels)
        for prof, util in self.utilities.items():
            stable = True
            for n in range(len(self.agents)):
                for alt in range(m):
                    if alt == prof[n]:
                        continue
                    dev = prof[:n] + (alt,) + prof[n + 1:]
                    if self.utilities[dev][n] > util[n] + tol:
                        stable = False
                        break
                if not stable:
                    break
            if stable:
                out.append(GridEquilibrium(tuple(self.levels[i] for i in prof), self.welfare[prof]))
        return out


def payoff_table(scenario: Scenario, levels=SHADING) -> GridGame:
    """Run every factor profile once on a single-realization scenario."""
    types: TypeProfile = scenario.prior.profile
    graph = scenario.graph
    agents = tuple(a for a in graph.agents if graph.incident(a))
    per_agent = {
        a: [shaded(types.agent_type(a, graph.side(a)), lam) for lam in levels] for a in agents
    }
    utilities, welfare = {}, {}
    for prof in product(range(len(levels)), repeat=len(agents)):
        schedules = {a: per_agent[a][i] for a, i in zip(agents, prof)}
        tr = run_schedules(graph, types, schedules, scenario.payment_rule, scenario.default_seed)
        utilities[prof] = tuple(tr.utilities[a] for a in agents)
        welfare[prof] = tr.welfare
    _, opt = max_weight_matching(WeightedInstance.from_surplus(graph.groups, types))
    return GridGame(agents, tuple(levels), utilities, welfare, opt)
