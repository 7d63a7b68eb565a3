"""``mm`` command-line entry point.

Exit codes: 0 on success or a passing audit, 2 on a failing audit, 1 on a
fault (bad input, undefined quantity).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import auditors
from .engine import run_match
from .market import (
    PaymentRule,
    Scenario,
    distribution_from_json,
    realize_types,
    scenario_from_json,
    scenario_to_json,
    validate_scenario,
)
from .oracles import expected_opt
from .pandora import strike_price
from .repro import TARGETS, run_target
from .report import reports_to_csv
from .scenarios import BUILTIN
from .strategies import DeviationFamily, StrategyProfile, resolve_strategy

EXIT_OK, EXIT_FAULT, EXIT_AUDIT_FAIL = 0, 1, 2


class Fault(Exception):
    pass


@dataclasses.dataclass
class RunConfig:
    scenario: Scenario
    profile: StrategyProfile
    seed: int
    samples: int
    out: Path | None


def load_scenario(spec: str, rule: str | None = None) -> Scenario:
    """A JSON path, or ``builtin:NAME`` for an embedded scenario."""
    if spec.startswith("builtin:"):
        name = spec.split(":", 1)[1]
        if name not in BUILTIN:
            raise Fault(f"unknown builtin scenario {name!r}; choose from {', '.join(BUILTIN)}")
        sc = BUILTIN[name]()
    else:
        path = Path(spec)
        if not path.is_file():
            raise Fault(f"scenario file not found: {spec}")
        try:
            sc = scenario_from_json(json.loads(path.read_text()))
        except (ValueError, KeyError, TypeError) as exc:
            raise Fault(f"malformed scenario {spec}: {exc}") from exc
    if rule is not None:
        sc = dataclasses.replace(sc, payment_rule=PaymentRule(rule))
    result = validate_scenario(sc)
    if not result.ok:
        raise Fault("invalid scenario:\n  " + "\n  ".join(result.messages()))
    return sc


def load_profile(spec: str, scenario: Scenario) -> StrategyProfile:
    """A strategy id used by every agent, or a JSON file
    ``{"default": ID, "agents": {AGENT: ID}}``."""
    graph = scenario.graph
    path = Path(spec)
    if path.suffix == ".json" or path.is_file():
        if not path.is_file():
            raise Fault(f"profile file not found: {spec}")
        raw = json.loads(path.read_text())
        default = raw.get("default")
        per_agent = raw.get("agents", {})
        unknown = set(per_agent) - set(graph.agents)
        if unknown:
            raise Fault(f"profile names unknown agents {sorted(unknown)}")
        ctors = {}
        for a in graph.agents:
            sid = per_agent.get(a, default)
            if sid is None:
                raise Fault(f"profile gives no strategy for agent {a!r}")
            ctors[a] = resolve_strategy(sid)
        return StrategyProfile(ctors)
    return StrategyProfile.uniform(graph, resolve_strategy(spec))


def resolve_seed(flag: int | None, scenario: Scenario) -> int:
    if flag is not None:
        return flag
    env = os.environ.get("MM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise Fault(f"MM_SEED must be an integer, got {env!r}") from None
    return scenario.default_seed


def _config(args) -> RunConfig:
    sc = load_scenario(args.scenario, args.rule)
    profile = load_profile(args.profile, sc) if getattr(args, "profile", None) else None
    out = Path(args.out) if args.out else None
    return RunConfig(sc, profile, resolve_seed(args.seed, sc), args.samples, out)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        print(text)
    else:
        out.write_text(text + "\n")


def _floats(text: str | None):
    if text is None:
        return None
    return tuple(float(x) for x in text.split(",") if x.strip())


# --- subcommands --------------------------------------------------------------------


def cmd_run(args) -> int:
    cfg = _config(args)
    types = realize_types(cfg.scenario.prior, cfg.seed)
    tr = run_match(cfg.scenario.graph, types, cfg.profile, cfg.scenario.payment_rule, cfg.seed)
    _emit(tr.to_json(), cfg.out)
    return EXIT_OK


def cmd_audit(args) -> int:
    cfg = _config(args)
    sc, prof = cfg.scenario, cfg.profile
    if args.kind == "expost":
        rep = auditors.ex_post_audit(sc, prof, args.k, cfg.samples, cfg.seed)
    elif args.kind == "exante":
        fam = DeviationFamily(args.family, _floats(args.bids), _floats(args.asks), args.cap)
        rep = auditors.ex_ante_audit(sc, prof, args.k, fam, cfg.samples, cfg.seed)
    elif args.kind == "nash":
        family = args.family if args.family != "pairwiseTruthful" else "constantGrid"
        fam = DeviationFamily(family, _floats(args.bids), _floats(args.asks), args.cap)
        rep = auditors.nash_audit(sc, prof, fam, cfg.samples, cfg.seed)
    else:
        if args.lemma is None:
            raise Fault("smoothness audit needs --lemma")
        rep = auditors.smoothness_check(args.lemma, sc, prof, cfg.samples, cfg.seed, args.inspect_rule)
    _emit(rep.to_json(), cfg.out)
    if args.csv:
        path = Path(args.csv)
        new = not path.exists() or path.stat().st_size == 0
        with path.open("a") as fh:
            fh.write(reports_to_csv([rep], header=new))
    else:
        sys.stderr.write(reports_to_csv([rep], header=True))
    return EXIT_OK if rep.passed else EXIT_AUDIT_FAIL


def cmd_poa(args) -> int:
    cfg = _config(args)
    try:
        rep = auditors.poa_report(cfg.scenario, cfg.profile, cfg.samples, cfg.seed, args.k, args.jobs)
    except ValueError as exc:
        welfare, se = auditors.expected_welfare(cfg.scenario, cfg.profile, cfg.samples, cfg.seed, args.jobs)
        raise Fault(f"{exc}; expected welfare {welfare} (stderr {se})") from exc
    _emit(json.dumps(rep.to_dict(), sort_keys=True), cfg.out)
    return EXIT_OK


def cmd_opt(args) -> int:
    sc = load_scenario(args.scenario, args.rule)
    seed = resolve_seed(args.seed, sc)
    mean, se = expected_opt(sc, args.samples, seed, args.weights)
    _emit(json.dumps({"expectedOpt": mean, "stderr": se, "weights": args.weights}), Path(args.out) if args.out else None)
    return EXIT_OK


def cmd_strike(args) -> int:
    try:
        dist = distribution_from_json(json.loads(args.dist))
    except (ValueError, KeyError, TypeError) as exc:
        raise Fault(f"bad distribution {args.dist!r}: {exc}") from exc
    sigma = strike_price(dist, args.cost)
    print(json.dumps({"strike": sigma, "residual": dist.expected_excess(sigma) - args.cost}))
    return EXIT_OK


def cmd_repro(args) -> int:
    names = list(TARGETS) if args.name == "all" else [args.name]
    ok = True
    for name in names:
        ok &= run_target(name)
    return EXIT_OK if ok else EXIT_FAULT


def cmd_replay(args) -> int:
    raw = json.loads(Path(args.witness).read_text())
    witness = raw.get("witness", raw)
    if not witness or "replay" not in witness:
        raise Fault("no replayable witness in input")
    value, trs = auditors.replay_witness(witness)
    out = {"violation": value, "transcripts": [json.loads(t.to_json()) for t in trs]}
    _emit(json.dumps(out, sort_keys=True), Path(args.out) if args.out else None)
    return EXIT_OK


def cmd_validate(args) -> int:
    sc = load_scenario(args.scenario, args.rule)
    print(json.dumps(scenario_to_json(sc), sort_keys=True) if args.dump else "ok")
    return EXIT_OK


# --- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="scenario JSON path or builtin:NAME")
    common.add_argument("--rule", choices=[r.value for r in PaymentRule])
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int, default=1000)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--out")

    with_profile = argparse.ArgumentParser(add_help=False, parents=[common])
    with_profile.add_argument("--profile", required=True, help="strategy id or profile JSON path")

    p = argparse.ArgumentParser(prog="mm", description="Descending-price matching simulator and audits.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[with_profile], help="run one realization, print the transcript")
    run.set_defaults(fn=cmd_run)

    audit = sub.add_parser("audit", parents=[with_profile], help="stability, equilibrium and smoothness audits")
    audit.add_argument("kind", choices=["expost", "exante", "nash", "smoothness"])
    audit.add_argument("--k", type=float, default=4.0)
    audit.add_argument("--family", default="pairwiseTruthful", choices=DeviationFamily.KINDS)
    audit.add_argument("--bids", help="comma-separated absolute bid grid")
    audit.add_argument("--asks", help="comma-separated absolute ask grid")
    audit.add_argument("--cap", type=int, default=200)
    audit.add_argument("--lemma", choices=auditors.LEMMAS)
    audit.add_argument("--inspect-rule", default="value", choices=["value", "covered"])
    audit.add_argument("--csv", help="append the CSV summary row here")
    audit.set_defaults(fn=cmd_audit)

    poa = sub.add_parser("poa", parents=[with_profile], help="expected welfare over expected OPT")
    poa.add_argument("--k", type=float, help="stability level for the rebate bound")
    poa.set_defaults(fn=cmd_poa)

    opt = sub.add_parser("opt", parents=[common], help="expected optimal matching weight")
    opt.add_argument("--weights", default="surplus", choices=["surplus", "coveredCall"])
    opt.set_defaults(fn=cmd_opt)

    pandora = sub.add_parser("pandora", help="inspection utilities")
    psub = pandora.add_subparsers(dest="pandora_command", required=True)
    strike = psub.add_parser("strike", help="strike price of a distribution")
    strike.add_argument("--dist", required=True, help='e.g. \'{"finite": [[0, 0.5], [10, 0.5]]}\'')
    strike.add_argument("--cost", type=float, required=True)
    strike.set_defaults(fn=cmd_strike)

    repro = sub.add_parser("repro", help="reproduce a worked example")
    repro.add_argument("name", choices=[*TARGETS, "all"])
    repro.set_defaults(fn=cmd_repro)

    replay = sub.add_parser("replay", help="re-run a failing audit's witness")
    replay.add_argument("--witness", required=True, help="audit report or witness JSON")
    replay.add_argument("--out")
    replay.set_defaults(fn=cmd_replay)

    validate = sub.add_parser("validate", help="check a scenario file")
    validate.add_argument("--scenario", required=True)
    validate.add_argument("--rule", choices=[r.value for r in PaymentRule])
    validate.add_argument("--dump", action="store_true")
    validate.set_defaults(fn=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (Fault, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"mm: error: {exc}", file=sys.stderr)
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
