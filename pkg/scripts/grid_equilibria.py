"""Enumerate shading-grid equilibria of small markets and compare to OPT.

    python3 scripts/grid_equilibria.py --size 2 --seeds 0-9
"""

import argparse
import time

from marshallian.equilibria import payoff_table
from marshallian.scenarios import group_demo, random_hypergraph, random_square


def seed_range(text: str) -> list:
    lo, _, hi = text.partition("-")
    return list(range(int(lo), int(hi or lo) + 1))


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=2, help="n for the n x n bipartite markets")
    ap.add_argument("--seeds", default="0-9")
    ap.add_argument("--hypergraphs", action="store_true", help="also run 3-uniform markets")
    args = ap.parse_args()

    games = [(f"{args.size}x{args.size} seed {s}", random_square(s, args.size), 8) for s in seed_range(args.seeds)]
    if args.hypergraphs:
        games.append(("group demo", group_demo(), 18))
        games += [(f"3-uniform seed {s}", random_hypergraph(s), 18) for s in seed_range(args.seeds)]
    print(f"{'market':<22}{'equilibria':>11}{'OPT':>9}{'worst':>9}{'worst/OPT':>11}{'bound':>8}{'secs':>7}")
    for label, sc, denom in games:
        t0 = time.perf_counter()
        game = payoff_table(sc)
        eqs = game.equilibria()
        secs = time.perf_counter() - t0
        if eqs:
            worst = min(e.welfare for e in eqs)
            ratio = f"{worst / game.opt:.3f}" if game.opt else "-"
            print(f"{label:<22}{len(eqs):>11}{game.opt:>9.3f}{worst:>9.3f}{ratio:>11}{'1/' + str(denom):>8}{secs:>7.2f}")
        else:
            print(f"{label:<22}{0:>11}{game.opt:>9.3f}{'-':>9}{'-':>11}{'1/' + str(denom):>8}{secs:>7.2f}")


if __name__ == "__main__":
    main()
