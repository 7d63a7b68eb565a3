"""Run every worked-example reproduction and report which ones hold."""

import sys

from marshallian.repro import TARGETS, run_target


def main() -> int:
    failed = []
    for name in TARGETS:
        if not run_target(name):
            failed.append(name)
        print()
    print(f"{len(TARGETS) - len(failed)}/{len(TARGETS)} targets reproduced")
    if failed:
        print("failed:", ", ".join(failed))
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
