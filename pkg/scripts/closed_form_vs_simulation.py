"""Compare closed-form cost and age pmf with Monte Carlo for a few thresholds.

Prints a table with the analytic cost, the pooled simulated cost, its
standard error and the total-variation distance between age pmfs.
"""

import argparse

from aoi_storage.closed_form import average_cost, format_threshold, parse_threshold, stationary_distribution
from aoi_storage.model import SystemParams
from aoi_storage.simulator import SimConfig, empirical_age_distribution, merge, simulate, standard_error, total_variation


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--q", type=float, default=0.5)
    ap.add_argument("--c", type=float, default=1.0)
    ap.add_argument("--thresholds", nargs="+", default=["1", "2", "3", "5", "10", "never"])
    ap.add_argument("--horizon", type=int, default=2_000_000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    args = ap.parse_args()

    params = SystemParams(args.p, args.q, args.c)
    print(f"{'v_bar':>6} {'f(v_bar)':>12} {'simulated':>12} {'se':>9} {'tv':>9}")
    for text in args.thresholds:
        v_bar = parse_threshold(text)
        runs = [simulate(params, v_bar, SimConfig(args.horizon, s)) for s in args.seeds]
        pooled = merge(runs, params.c)
        ana = stationary_distribution(params, v_bar).truncated_pmf(4000)
        tv = total_variation(empirical_age_distribution(pooled)[1:], ana)
        print(f"{format_threshold(v_bar):>6} {average_cost(params, v_bar):12.6f} {pooled.avg_cost:12.6f} "
              f"{standard_error(runs):9.2e} {tv:9.2e}")


if __name__ == "__main__":
    main()
