"""Welfare, stability, equilibrium, smoothness, and price-of-anarchy audits.

Every audit evaluates its inequality through a named check applied to a
list of runs (type realization + precommitted schedules + tie seed).  A
failing report stores those runs in its witness, so
:func:`replay_witness` recomputes the violation from the witness alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

from .engine import Transcript, run_match, run_schedules
from .market import (
    Inspectable,
    MarketGraph,
    PaymentRule,
    Scenario,
    TypeProfile,
    Value,
    group_key,
    make_group,
    scenario_from_json,
    scenario_to_json,
    surplus,
)
from .clock import PriceSchedule
from .oracles import expected_opt
from .pandora import covered_call, strike_of
from .report import AuditReport
from .sampling import draws, mean_stderr, parallel_map
from .schedule import BidSchedule
from .strategies import (
    DeviationFamily,
    StrategyProfile,
    half_value,
    truthful,
    zero_then_inspect,
)

EXACT_SLACK = 1e-9
Z = 3.0


# --- runs and replay -------------------------------------------------------------


@dataclass(frozen=True)
class Run:
    label: str
    types: TypeProfile
    schedules: dict
    seed: int
    weight: float = 1.0

    def execute(self, scenario: Scenario) -> Transcript:
        clock = PriceSchedule(scenario.p_max) if scenario.p_max is not None else None
        return run_schedules(scenario.graph, self.types, self.schedules, scenario.payment_rule, self.seed, clock)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "types": self.types.to_dict(),
            "schedules": {a: s.to_dict() for a, s in sorted(self.schedules.items())},
            "seed": self.seed,
            "weight": self.weight,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Run":
        return cls(
            d["label"],
            TypeProfile.from_dict(d["types"]),
            {a: BidSchedule.from_dict(s) for a, s in d["schedules"].items()},
            int(d["seed"]),
            float(d["weight"]),
        )


def _make_witness(scenario: Scenario, check: str, params: dict, runs, value: float, **extra) -> dict:
    return {
        **extra,
        "violation": value,
        "replay": {
            "scenario": scenario_to_json(scenario),
            "check": check,
            "params": params,
            "runs": [r.to_dict() for r in runs],
        },
    }


def replay_witness(witness: dict) -> tuple:
    """Re-run a witness; returns ``(violation_value, transcripts)``."""
    spec = witness["replay"]
    scenario = scenario_from_json(spec["scenario"])
    runs = [Run.from_dict(r) for r in spec["runs"]]
    trs = [r.execute(scenario) for r in runs]
    value = CHECKS[spec["check"]](scenario.graph, spec["params"], runs, trs)
    return value, trs


def _by_label(runs, trs, label):
    return [(r, t) for r, t in zip(runs, trs) if r.label == label]


def _weighted(pairs, fn) -> float:
    return math.fsum(r.weight * fn(r, t) for r, t in pairs)


# slack functions: negative means the inequality is violated


def _check_expost(graph, params, runs, trs) -> float:
    (r, t), = _by_label(runs, trs, "base")
    i, j = params["pair"]
    return t.utilities[i] + t.utilities[j] - surplus(r.types, make_group((i, j))) / params["k"]


def _check_exante(graph, params, runs, trs) -> float:
    i, j = params["pair"]
    joint = lambda r, t: t.utilities[i] + t.utilities[j]
    left = _weighted(_by_label(runs, trs, "base"), joint)
    right = _weighted(_by_label(runs, trs, "deviation"), joint)
    return left - right / params["k"]


def _check_nash(graph, params, runs, trs) -> float:
    a = params["agent"]
    own = lambda r, t: t.utilities[a]
    return _weighted(_by_label(runs, trs, "base"), own) - _weighted(_by_label(runs, trs, "deviation"), own)


def _covered_utility(t: Transcript, types: TypeProfile, agent) -> float:
    g = t.group_of(agent)
    if g is None:
        kappa = 0.0
    else:
        val = types.valuation(agent, g)
        kappa = covered_call(val.drawn, strike_of(val)) if isinstance(val, Inspectable) else types.value(agent, g)
    return kappa - t.payments[agent]


def _check_smooth(graph, params, runs, trs) -> float:
    lemma = params["lemma"]
    (rb, tb), = _by_label(runs, trs, "base")
    (rd, td), = _by_label(runs, trs, "deviation")
    types = rb.types
    if lemma == "NonNeg":
        i, j = params["pair"]
        g = make_group((i, j))
        return td.utilities[i] + tb.group_price[i] / 4 + tb.group_price[j] / 4 - types.value(i, g) / 8
    if lemma == "Group":
        i, S, k = params["agent"], make_group(params["group"]), params["k"]
        pay = math.fsum(tb.group_price[j] for j in S)
        return td.utilities[i] + pay / k**2 - types.value(i, S) / (2 * k**2)
    if lemma == "Inspect":
        i, j = params["pair"]
        val = types.valuation(i, make_group((i, j)))
        kappa = covered_call(val.drawn, strike_of(val))
        ubar = _covered_utility(td, types, i)
        return ubar + tb.group_price[i] / 4 + tb.group_price[j] / 4 - kappa / 8
    if lemma == "RebatePair":
        i, j = params["pair"]
        return td.utilities[i] + td.utilities[j] - surplus(types, make_group((i, j))) / 4
    raise ValueError(f"unknown lemma {lemma!r}")


CHECKS = {
    "expost": _check_expost,
    "exante": _check_exante,
    "nash": _check_nash,
    "smoothness": _check_smooth,
}


# --- helpers ---------------------------------------------------------------------


def _execute(scenario: Scenario, runs) -> list:
    return [r.execute(scenario) for r in runs]


def _base_runs(scenario: Scenario, profile: StrategyProfile, ds) -> list:
    return [Run("base", d.types, profile.schedules(d.types, scenario.graph), d.run_seed, d.weight) for d in ds]


def _dev_runs(scenario: Scenario, profile: StrategyProfile, ds) -> list:
    return [Run("deviation", d.types, profile.schedules(d.types, scenario.graph), d.run_seed, d.weight) for d in ds]


def _pairs(graph: MarketGraph) -> list:
    """Feasible (bidder, asker) pairs; unlabelled edges in canonical order."""
    out = []
    for g in graph.edges():
        if graph.side_labels is not None:
            out.append(graph.bidder_asker(g))
        else:
            out.append(tuple(g))
    return out


def _welfare_of(task) -> float:
    scenario, profile, d = task
    return run_match(scenario.graph, d.types, profile, scenario.payment_rule, d.run_seed, _clock(scenario)).welfare


def _clock(scenario: Scenario):
    return PriceSchedule(scenario.p_max) if scenario.p_max is not None else None


# --- audits ----------------------------------------------------------------------


def expected_welfare(scenario: Scenario, profile: StrategyProfile, samples: int = 1000, seed: int = 0, jobs: int = 1) -> tuple:
    """(mean, stderr) of realized welfare; exact for enumerable priors."""
    ds = draws(scenario.prior, samples, seed)
    vals = parallel_map(_welfare_of, [(scenario, profile, d) for d in ds], jobs)
    return mean_stderr(vals, [d.weight for d in ds], ds.exact)


def ex_post_audit(scenario: Scenario, profile: StrategyProfile, k: float, samples: int = 200, seed: int = 0) -> AuditReport:
    """u_i + u_j >= s_ij / k for every feasible pair in every realization."""
    ds = draws(scenario.prior, samples, seed)
    runs = _base_runs(scenario, profile, ds)
    trs = _execute(scenario, runs)
    worst, witness = math.inf, None
    for r, t in zip(runs, trs):
        for pair in _pairs(scenario.graph):
            params = {"pair": list(pair), "k": k}
            slack = _check_expost(scenario.graph, params, [r], [t])
            if slack < worst:
                worst = slack
                if slack < -EXACT_SLACK:
                    witness = _make_witness(scenario, "expost", params, [r], slack, pair=list(pair))
    return AuditReport(
        "expost",
        "fail" if witness else "pass",
        statistic=0.0 if worst == math.inf else worst,
        bound=0.0,
        witness=witness,
        samples=len(ds),
        seed=seed,
        details={"k": k, "exact": ds.exact},
    )


def ex_ante_audit(
    scenario: Scenario,
    profile: StrategyProfile,
    k: float,
    family: DeviationFamily = DeviationFamily("pairwiseTruthful"),
    samples: int = 200,
    seed: int = 0,
) -> AuditReport:
    """E[u_i + u_j] >= E[u_i' + u_j'] / k for every pair and pair deviation."""
    ds = draws(scenario.prior, samples, seed)
    weights = [d.weight for d in ds]
    base = _base_runs(scenario, profile, ds)
    base_trs = _execute(scenario, base)
    worst, witness, checked = math.inf, None, 0
    worst_info = {}
    for i, j in _pairs(scenario.graph):
        left, left_se = mean_stderr([t.utilities[i] + t.utilities[j] for t in base_trs], weights, ds.exact)
        for n, (di, dj) in enumerate(family.pair_deviations(i, j, scenario.graph)):
            dev = _dev_runs(scenario, profile.replace({i: di, j: dj}), ds)
            dev_trs = _execute(scenario, dev)
            right, right_se = mean_stderr([t.utilities[i] + t.utilities[j] for t in dev_trs], weights, ds.exact)
            checked += 1
            slack = left - right / k
            tol = EXACT_SLACK if ds.exact else Z * math.hypot(left_se, right_se / k)
            if slack < worst:
                worst = slack
                worst_info = {"pair": [i, j], "left": left, "right": right}
            if slack < -tol and (witness is None or slack < witness["violation"]):
                params = {"pair": [i, j], "k": k}
                witness = _make_witness(
                    scenario, "exante", params, base + dev, slack,
                    pair=[i, j], deviation=n, left=left, right=right, tolerance=tol,
                )
    return AuditReport(
        "exante",
        "fail" if witness else "pass",
        statistic=0.0 if worst == math.inf else worst,
        bound=0.0,
        witness=witness,
        samples=len(ds),
        seed=seed,
        family=family.describe(),
        details={"k": k, "exact": ds.exact, "deviationsChecked": checked, "worst": worst_info},
    )


def nash_audit(
    scenario: Scenario,
    profile: StrategyProfile,
    grid: DeviationFamily,
    samples: int = 200,
    seed: int = 0,
) -> AuditReport:
    """No unilateral deviation in ``grid`` raises an agent's expected utility.

    Certifies equilibrium with respect to the grid only.
    """
    ds = draws(scenario.prior, samples, seed)
    weights = [d.weight for d in ds]
    base = _base_runs(scenario, profile, ds)
    base_trs = _execute(scenario, base)
    best_gain, witness, checked = -math.inf, None, 0
    for a in scenario.graph.agents:
        for n, dev_strategy in enumerate(grid.strategies_for(a, scenario.graph)):
            dev = _dev_runs(scenario, profile.replace({a: dev_strategy}), ds)
            dev_trs = _execute(scenario, dev)
            diffs = [td.utilities[a] - tb.utilities[a] for tb, td in zip(base_trs, dev_trs)]
            gain, se = mean_stderr(diffs, weights, ds.exact)
            checked += 1
            tol = EXACT_SLACK if ds.exact else Z * se
            best_gain = max(best_gain, gain)
            if gain > tol and (witness is None or -gain < witness["violation"]):
                params = {"agent": a}
                witness = _make_witness(
                    scenario, "nash", params, base + dev, -gain,
                    agent=a, deviation=n, gain=gain,
                    deviationUtility=mean_stderr([t.utilities[a] for t in dev_trs], weights, ds.exact)[0],
                    schedule=dev[0].schedules[a].to_dict(),
                    tolerance=tol,
                )
    return AuditReport(
        "nash",
        "fail" if witness else "pass",
        statistic=0.0 if best_gain == -math.inf else best_gain,
        bound=0.0,
        witness=witness,
        samples=len(ds),
        seed=seed,
        family=grid.describe(),
        details={"exact": ds.exact, "deviationsChecked": checked},
    )


LEMMAS = ("NonNeg", "Group", "Inspect", "RebatePair")


def _lemma_deviation(lemma: str, inspect_rule: str):
    if lemma in ("NonNeg", "Group"):
        return half_value
    if lemma == "Inspect":
        return partial(zero_then_inspect, rule=inspect_rule)
    return truthful


def _check_setting(lemma: str, scenario: Scenario, base: Run) -> None:
    if lemma == "RebatePair":
        if scenario.payment_rule is not PaymentRule.QUARTER_REBATE:
            raise ValueError("RebatePair needs the quarter-rebate rule")
        return
    for (a, g), val in base.types.entries.items():
        if isinstance(val, Inspectable):
            if val.drawn is not None and val.drawn < 0:
                raise ValueError(f"{lemma} needs nonnegative values; {a} has {val.drawn} on {group_key(g)}")
        elif not isinstance(val, Value) or val.v < 0:
            raise ValueError(f"{lemma} needs nonnegative values; {a} has {val!r} on {group_key(g)}")
    for a, sched in base.schedules.items():
        for g, bps in sched.per_group.items():
            if any(b < 0 for _, b in bps):
                raise ValueError(f"{lemma} needs nonnegative bids; {a} bids below 0 on {group_key(g)}")
        if any(tr.fraction < 0 for tr in sched.reactive):
            raise ValueError(f"{lemma} needs nonnegative bids; {a} has a negative rebid fraction")


def smoothness_check(
    lemma: str,
    scenario: Scenario,
    profile: StrategyProfile,
    samples: int = 100,
    seed: int = 0,
    inspect_rule: str = "value",
) -> AuditReport:
    """Pointwise smoothness inequality for the lemma's prescribed deviation.

    NonNeg:     u_i(b_-i, b_i') + p_i(b)/4 + p_j(b)/4 >= v_ij/8
    Group:      u_i(b_-i, b_i') + sum_{j in S} p_j(b)/k^2 >= v_iS/(2k^2)
    Inspect:    covered-call utility of the deviation + p_i(b)/4 + p_j(b)/4 >= kappa_ij/8
    RebatePair: u_i + u_j under the pair's joint truthful deviation >= s_ij/4

    The first three hold in the nonnegative setting only, where values and
    bids are both nonnegative; other inputs raise ``ValueError``.
    ``inspect_rule="covered"`` rebids min(sigma, v)/2 after inspecting
    instead of v/2.
    """
    if lemma not in LEMMAS:
        raise ValueError(f"unknown lemma {lemma!r}")
    graph = scenario.graph
    ds = draws(scenario.prior, samples, seed)
    deviation = _lemma_deviation(lemma, inspect_rule)
    worst, witness, checked, violations = math.inf, None, 0, 0
    k = graph.max_group_size
    for d in ds:
        base = Run("base", d.types, profile.schedules(d.types, graph), d.run_seed)
        _check_setting(lemma, scenario, base)
        tb = base.execute(scenario)
        if lemma == "RebatePair":
            units = [((i, j), {i: deviation, j: deviation}) for i, j in _pairs(graph)]
        elif lemma == "Inspect":
            # the deviation is defined for agents whose every entry is inspectable
            units = [
                (a, {a: deviation})
                for a in graph.agents
                if graph.incident(a)
                and all(isinstance(d.types.valuation(a, g), Inspectable) for g in graph.incident(a))
            ]
        else:
            units = [(a, {a: deviation}) for a in graph.agents if graph.incident(a)]
        for unit, repl in units:
            dev = Run("deviation", d.types, profile.replace(repl).schedules(d.types, graph), d.run_seed)
            td = dev.execute(scenario)
            if lemma == "RebatePair":
                checks = [{"lemma": lemma, "pair": list(unit)}]
            elif lemma == "Group":
                checks = [{"lemma": lemma, "agent": unit, "group": list(S), "k": k} for S in graph.incident(unit)]
            else:
                checks = [
                    {"lemma": lemma, "pair": [unit, next(x for x in S if x != unit)]}
                    for S in graph.incident(unit)
                    if len(S) == 2
                ]
            for params in checks:
                slack = _check_smooth(graph, params, [base, dev], [tb, td])
                checked += 1
                worst = min(worst, slack)
                if slack < -EXACT_SLACK:
                    violations += 1
                    if witness is None or slack < witness["violation"]:
                        witness = _make_witness(scenario, "smoothness", params, [base, dev], slack, **params)
    return AuditReport(
        f"smoothness:{lemma}",
        "fail" if witness else "pass",
        statistic=0.0 if worst == math.inf else worst,
        bound=0.0,
        witness=witness,
        samples=len(ds),
        seed=seed,
        family=lemma,
        details={"inequalitiesChecked": checked, "violations": violations, "inspectRule": inspect_rule},
    )


@dataclass(frozen=True)
class PoAReport:
    ratio: float
    ratio_stderr: float
    welfare: float
    welfare_stderr: float
    opt: float
    opt_stderr: float
    bound: float | None
    bound_label: str | None

    def to_dict(self) -> dict:
        return {
            "welfareRatio": self.ratio,
            "ratioStderr": self.ratio_stderr,
            "welfare": self.welfare,
            "welfareStderr": self.welfare_stderr,
            "opt": self.opt,
            "optStderr": self.opt_stderr,
            "bound": self.bound,
            "boundLabel": self.bound_label,
        }


def context_bound(scenario: Scenario, stability_k: float | None = None) -> tuple:
    """The welfare guarantee that applies to the scenario's setting."""
    g = scenario.graph
    if scenario.payment_rule is PaymentRule.QUARTER_REBATE:
        if stability_k is None:
            return None, None
        return 1 / (4 * stability_k), f"1/(4k), k={stability_k:g}"
    k = g.max_group_size
    if any(len(S) > 2 for S in g.groups):
        return 1 / (2 * k * k), f"1/(2k^2), k={k}"
    return 1 / 8, "1/8"


def poa_report(
    scenario: Scenario,
    profile: StrategyProfile,
    samples: int = 1000,
    seed: int = 0,
    stability_k: float | None = None,
    jobs: int = 1,
) -> PoAReport:
    welfare, w_se = expected_welfare(scenario, profile, samples, seed, jobs)
    opt, o_se = expected_opt(scenario, samples, seed)
    if opt == 0:
        raise ValueError(f"expected OPT is 0, ratio undefined (welfare = {welfare})")
    ratio = welfare / opt
    ratio_se = abs(ratio) * math.hypot(w_se / welfare if welfare else 0.0, o_se / opt)
    if welfare == 0:
        ratio_se = w_se / abs(opt)
    bound, label = context_bound(scenario, stability_k)
    return PoAReport(ratio, ratio_se, welfare, w_se, opt, o_se, bound, label)


def is_nonnegative(types: TypeProfile) -> bool:
    return all(
        (isinstance(v, Value) and v.v >= 0) or isinstance(v, Inspectable)
        for v in types.entries.values()
    )
