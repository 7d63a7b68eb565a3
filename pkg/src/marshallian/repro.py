"""Self-contained reproductions of the worked examples.

Each target prints claimed and computed quantities side by side and returns
True when every claim matches.
"""

from __future__ import annotations

import math

from .auditors import ex_ante_audit, expected_welfare, nash_audit, poa_report
from .engine import run_match
from .equilibria import payoff_table
from .market import make_group
from .oracles import WeightedInstance, greedy_matching, max_weight_matching
from .pandora import covered_call_gap, exercise_audit, strike_price
from .sampling import draws
from .scenarios import BINARY, fig1, group_demo, lovers, pandora_binary, random_general, refusal_market
from .strategies import (
    DeviationFamily,
    StrategyProfile,
    constant,
    refusal_profile,
    truthful,
    zero_then_inspect,
)


class Checker:
    def __init__(self, out):
        self.out = out
        self.ok = True

    def claim(self, label: str, claimed, computed, tol: float = 0.0) -> None:
        if isinstance(claimed, (int, float)) and not isinstance(claimed, bool):
            good = abs(computed - claimed) <= tol
        else:
            good = claimed == computed
        self.ok &= good
        self.out(f"  {'ok ' if good else 'BAD'} {label}: claimed {claimed}, computed {computed}")


def refusal_equilibrium(out=print) -> bool:
    sc = refusal_market(2)
    prof = refusal_profile(sc.graph)
    chk = Checker(out)
    out("refusal-equilibrium: 2x2 market, v = 2, c = 1, everyone bids 0 / asks 4")
    chk.claim("expected welfare", 0.0, expected_welfare(sc, prof)[0])
    grid = DeviationFamily(
        "constantGrid",
        bids=tuple(x / 2 for x in range(0, 11)),
        asks=tuple(x / 2 for x in range(-2, 11)),
    )
    chk.claim("nash audit over bid/ask grid", "pass", nash_audit(sc, prof, grid).verdict)
    types = sc.prior.profile
    b, a = "b0", "a0"
    worst = -math.inf
    target = make_group((b, a))

    def deviate(x):
        bids = {g: (x if g == target else 0.0) for g in sc.graph.incident(b)}
        dev = prof.replace({b: constant(bids)})
        return run_match(sc.graph, types, dev, sc.payment_rule).utilities[b]

    worst = max(deviate(x) for x in (4.0, 4.5, 5.0))
    chk.claim("best bidder utility with b >= 4 is at most -1", True, worst <= -1)
    chk.claim("bidder utility at b = 4", -2.0, deviate(4.0))
    chk.claim(
        "ex ante audit (k = 4, pairwise truthful)",
        "fail",
        ex_ante_audit(sc, prof, 4, DeviationFamily("pairwiseTruthful")).verdict,
    )
    return chk.ok


def fig1_overbid(out=print, k: float = 10.0) -> bool:
    sc = fig1(k)
    types = sc.prior.profile
    base = StrategyProfile.uniform(sc.graph, truthful)
    chk = Checker(out)
    out(f"fig1-overbid: k = {k:g}, B overbids k + 2 against truthful A and C")
    chk.claim("truthful utility of B", 0.0, run_match(sc.graph, types, base, sc.payment_rule).utilities["B"])
    dev = base.replace({"B": constant({make_group("BC"): k + 2})})
    tr = run_match(sc.graph, types, dev, sc.payment_rule)
    chk.claim("deviation utility of B (k/4 - 3/2)", k / 4 - 1.5, tr.utilities["B"])
    return chk.ok


def truthful_greedy(out=print, n: int = 100) -> bool:
    chk = Checker(out)
    out(f"truthful-greedy: {n} random graphs, values U[0,10], truthful pay-your-bid")
    same = half = 0
    for seed in range(n):
        sc = random_general(seed)
        types = sc.prior.profile
        tr = run_match(sc.graph, types, StrategyProfile.uniform(sc.graph, truthful), sc.payment_rule, seed)
        inst = WeightedInstance.from_surplus(sc.graph.groups, types)
        greedy, _ = greedy_matching(inst, seed)
        same += [m.group for m in tr.matches] == list(greedy)
        half += tr.welfare >= max_weight_matching(inst)[1] / 2 - 1e-9
    chk.claim("instances where engine matching equals greedy", n, same)
    chk.claim("instances with welfare >= OPT/2", n, half)
    return chk.ok


def pandora_binary_demo(out=print) -> bool:
    chk = Checker(out)
    out("pandora-binary: value 0 or 10 with equal odds, inspection cost 1")
    sigma = strike_price(BINARY, 1.0)
    chk.claim("strike price", 8.0, sigma, 1e-9)
    chk.claim("expected excess at the strike", 1.0, BINARY.expected_excess(sigma), 1e-9)
    sc = pandora_binary()
    prof = StrategyProfile.uniform(sc.graph, truthful).replace({"A": zero_then_inspect})
    gap = covered_call_gap(sc, prof, 2000, 0)
    chk.claim("covered-call identity holds (|gap| <= 3 stderr)", True, abs(gap.lhs - gap.rhs) <= 3 * gap.stderr + 1e-9)
    ds = draws(sc.prior, 200, 0)
    trs = [run_match(sc.graph, d.types, prof, sc.payment_rule, d.run_seed) for d in ds]
    chk.claim("exercise audit", "pass", exercise_audit(trs, [d.types for d in ds]).verdict)
    return chk.ok


def group_demo_target(out=print) -> bool:
    sc = group_demo()
    k = sc.graph.max_group_size
    chk = Checker(out)
    out(f"group-demo: 3-uniform hypergraph, k = {k}, all shading-grid equilibria")
    game = payoff_table(sc)
    eqs = game.equilibria()
    worst = min((e.welfare for e in eqs), default=math.inf)
    out(f"  {len(eqs)} grid equilibria, OPT = {game.opt:g}, worst equilibrium welfare = {worst:g}")
    chk.claim("worst equilibrium welfare >= OPT/(2k^2)", True, worst >= game.opt / (2 * k * k) - 1e-9)
    return chk.ok


def lovers_demo(out=print) -> bool:
    sc = lovers(3)
    prof = refusal_profile(sc.graph)
    chk = Checker(out)
    out("lovers-demo: 3x3 market, surplus only on a uniformly random perfect matching")
    fam = DeviationFamily(
        "constantGrid", bids=(0.0, 1.0, 2.0, 4.0, 6.0), asks=(-1.0, 0.0, 1.0, 2.0, 4.0, 10.0)
    )
    chk.claim("refusal stable against type-blind joint deviations (k = 1)", "pass", ex_ante_audit(sc, prof, 1, fam).verdict)
    rep = poa_report(sc, prof)
    chk.claim("welfare ratio of that profile", 0.0, rep.ratio)
    chk.claim(
        "pairs that condition on their own types still block (k = 4)",
        "fail",
        ex_ante_audit(sc, prof, 4, DeviationFamily("pairwiseTruthful")).verdict,
    )
    return chk.ok


TARGETS = {
    "refusal-equilibrium": refusal_equilibrium,
    "fig1-overbid": fig1_overbid,
    "truthful-greedy": truthful_greedy,
    "pandora-binary": pandora_binary_demo,
    "group-demo": group_demo_target,
    "lovers-demo": lovers_demo,
}


def run_target(name: str, out=print) -> bool:
    try:
        fn = TARGETS[name]
    except KeyError:
        raise ValueError(f"unknown repro target {name!r}; choose from {', '.join(TARGETS)}") from None
    return fn(out=out)
