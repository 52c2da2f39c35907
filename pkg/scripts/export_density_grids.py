#!/usr/bin/env python3
"""Export surface/contour grid data for the two reference parameter sets.

Writes the planar-density grid plus the diagonal-channel companion file for
each set (the data behind the usual surface and contour plots; rendering is
left to external tools).

Usage:
    python scripts/export_density_grids.py [--out-dir grids] [--xmax 4.0] [--steps 81]
"""

import argparse
import sys
from pathlib import Path

from mbvge.cli import cmd_density_grid

SETS = {
    "xi1": {"p": 0.6, "a1": 0.5, "a2": 0.4, "a3": 0.3, "l1": 2.0,
            "b1": 0.5, "b2": 1.5, "b3": 0.5, "l2": 1.5},
    "xi2": {"p": 0.3, "a1": 1.0, "a2": 1.2, "a3": 1.0, "l1": 1.0,
            "b1": 1.0, "b2": 1.4, "b3": 2.0, "l2": 0.5},
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("grids"))
    parser.add_argument("--xmax", type=float, default=4.0)
    parser.add_argument("--steps", type=int, default=81)
    args = parser.parse_args(argv)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for name, params in SETS.items():
        out = args.out_dir / f"{name}.csv"
        cmd_density_grid({
            "params": params,
            "xmin": 0.0,
            "xmax": args.xmax,
            "steps": args.steps,
            "out": str(out),
        })
        print(f"wrote {out} and {out.with_name(out.stem + '.diag.csv')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
