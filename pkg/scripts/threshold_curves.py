"""Write optimal-threshold curves v*(p) for several (q, c) pairs as CSV.

One file per (q, c); columns match ``aoi-storage sweep``.  Plot
``axis_value`` against ``v_star`` to get the threshold-vs-arrival-rate curves.
"""

import argparse
import itertools
from pathlib import Path

import numpy as np

from aoi_storage.cli import main as cli_main


def run(out_dir: Path, qs, cs, axis: str):
    out_dir.mkdir(parents=True, exist_ok=True)
    values = [f"{x:.2f}" for x in np.arange(0.05, 0.96, 0.05)]
    other = "q" if axis == "p" else "p"
    for fixed, c in itertools.product(qs, cs):
        path = out_dir / f"vstar_vs_{axis}_{other}{fixed:g}_c{c:g}.csv"
        cli_main(["sweep", "--axis", axis, "--values", *values, f"--{other}", str(fixed), "--c", str(c),
                  "--out", str(path)])
        print(path)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path("results/threshold_curves"))
    ap.add_argument("--fixed", type=float, nargs="+", default=[0.3, 0.5, 0.7, 0.9])
    ap.add_argument("--costs", type=float, nargs="+", default=[0.5, 2.0, 10.0])
    ap.add_argument("--axis", choices=("p", "q"), default="p")
    args = ap.parse_args()
    run(args.out_dir, args.fixed, args.costs, args.axis)
