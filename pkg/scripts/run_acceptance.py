#!/usr/bin/env python3
"""Run an acceptance suite from the command line.

    python3 scripts/run_acceptance.py [suite] [seed]

Defaults to the full suite with seed 0.  Exit code 1 when any criterion fails.
"""

import sys

from xhbac.acceptance import run_acceptance


def main(argv):
    suite = argv[1] if len(argv) > 1 else "all"
    seed = int(argv[2]) if len(argv) > 2 else 0
    results = run_acceptance(suite, seed=seed)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
