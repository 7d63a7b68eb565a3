"""Histogram of audit statistics from a CSV written by ``mm audit --csv`` or the sweep script.

    python3 scripts/plot_reports.py inspect.csv --out inspect.png

Needs matplotlib (``pip install artifact[plots]``).
"""

import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("csv")
    ap.add_argument("--out", default="reports.png")
    args = ap.parse_args()

    with open(args.csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    by_name = {}
    for r in rows:
        by_name.setdefault(r["auditName"], []).append(float(r["statistic"]))
    fig, axes = plt.subplots(len(by_name), 1, figsize=(6, 2.5 * len(by_name)), squeeze=False)
    for ax, (name, stats) in zip(axes[:, 0], sorted(by_name.items())):
        ax.hist(stats, bins=40)
        ax.axvline(0.0, color="k", lw=0.8)
        fails = sum(r["verdict"] == "fail" for r in rows if r["auditName"] == name)
        ax.set_title(f"{name}: {fails}/{len(stats)} fail")
        ax.set_xlabel("statistic")
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
