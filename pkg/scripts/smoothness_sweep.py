"""Random sweep of the smoothness inequalities; one CSV row per (instance, profile).

    python3 scripts/smoothness_sweep.py --lemma Inspect --pairs 500 --csv inspect.csv
"""

import argparse
import sys

from marshallian.auditors import LEMMAS, smoothness_check
from marshallian.report import reports_to_csv
from marshallian.scenarios import random_bipartite, random_hypergraph, random_inspection, random_nonneg_uniform
from marshallian.strategies import DEFAULT_GRID, NONNEG_GRID, random_grid_profile

SUITES = {
    "NonNeg": (random_nonneg_uniform, NONNEG_GRID),
    "Group": (lambda s: random_hypergraph(s, agents=6 + s % 2, groups=3 + s % 4), NONNEG_GRID),
    "Inspect": (random_inspection, NONNEG_GRID),
    "RebatePair": (random_bipartite, DEFAULT_GRID),
}


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--lemma", choices=LEMMAS, required=True)
    ap.add_argument("--pairs", type=int, default=500)
    ap.add_argument("--samples", type=int, default=1)
    ap.add_argument("--inspect-rule", default="value", choices=["value", "covered"])
    ap.add_argument("--csv", help="write per-pair rows here")
    args = ap.parse_args()

    make, levels = SUITES[args.lemma]
    reports = []
    for seed in range(args.pairs):
        sc = make(seed)
        prof = random_grid_profile(sc.graph, 10_000 + seed, levels)
        reports.append(smoothness_check(args.lemma, sc, prof, args.samples, seed, inspect_rule=args.inspect_rule))
    bad = [r for r in reports if not r.passed]
    checked = sum(r.details["inequalitiesChecked"] for r in reports)
    print(f"{args.lemma} ({args.inspect_rule}): {len(bad)}/{len(reports)} pairs violate, {checked} inequalities")
    if bad:
        worst = min(bad, key=lambda r: r.statistic)
        print(f"worst slack {worst.statistic:.6f} at seed {worst.seed}")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(reports_to_csv(reports))
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
