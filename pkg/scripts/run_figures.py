#!/usr/bin/env python3
"""Emit every figure table into an output directory.

    python3 scripts/run_figures.py [outdir] [--fast]

`--fast` shrinks the angle window and atom counts for a quick smoke run.
"""

import pathlib
import sys
import time

from xhbac.config import ExperimentConfig
from xhbac.figures import FIGURE_IDS, run_figure

FAST_OVERRIDES = {
    "fig3": {"s_hi": "50", "rounds": "15"},
    "fig5": {"n_atoms": "20", "ratios": "inf,10,1"},
    "fig7": {"rounds": "15"},
    "fig8": {"rounds": "15", "t_th_grid": "inf,1,0"},
    "fig9": {"n_atoms": "20", "ratios": "inf,10,1"},
}


def main(argv):
    outdir = pathlib.Path(argv[1]) if len(argv) > 1 and not argv[1].startswith("-") else pathlib.Path("figures_out")
    fast = "--fast" in argv
    outdir.mkdir(parents=True, exist_ok=True)
    for fig_id in FIGURE_IDS:
        config = ExperimentConfig()
        if fast:
            config = config.with_overrides(FAST_OVERRIDES[fig_id])
        start = time.perf_counter()
        table = run_figure(fig_id, config)
        path = outdir / f"{fig_id}.csv"
        table.write(path)
        print(f"{fig_id}: {len(table.rows)} rows -> {path} ({time.perf_counter() - start:.1f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
