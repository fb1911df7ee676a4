"""Command-line entry point: ``aoi-storage {optimize,sweep,solve-mdp,simulate,validate}``.

Exit codes: 0 success, 1 failed check or non-convergence, 2 usage error.
CSV output carries 12 significant digits; ``--json`` carries full precision.
The string ``inf`` stands for the never-store threshold everywhere.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from datetime import datetime, timezone

from . import __version__
from .closed_form import format_threshold, parse_threshold
from .mdp import (
    NotThreshold,
    check_monotone_in_age,
    discounted_value_iteration,
    extract_threshold,
    greedy_policy,
    relative_value_iteration,
)
from .model import SystemParams
from .optimizer import Bracket, brute_force_threshold, find_optimal_threshold
from .simulator import SimConfig, merge, simulate, standard_error

RUN_FIELDS = ("p", "q", "c", "v_star", "cost", "method", "bracket_lo", "bracket_hi", "timestamp", "tool_version")
SWEEP_FIELDS = ("axis_value", "v_star", "cost")
SIM_FIELDS = ("seed", "p", "q", "c", "threshold", "slots", "avg_cost", "avg_age", "storage_rate", "se_avg_cost")


def _g(x: float) -> str:
    """12-significant-digit CSV number, ``inf``/``nan`` spelled out."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.isoformat(timespec="seconds")


@dataclass(frozen=True)
class RunRecord:
    p: float
    q: float
    c: float
    v_star: int | float
    cost: float
    method: str
    bracket_lo: float | None
    bracket_hi: float | None
    timestamp: str
    tool_version: str

    def to_json(self) -> str:
        d = asdict(self)
        d["v_star"] = format_threshold(self.v_star)
        return json.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        d = json.loads(text)
        d["v_star"] = parse_threshold(d["v_star"])
        return cls(**d)

    def csv_row(self) -> list[str]:
        lo = "" if self.bracket_lo is None else _g(self.bracket_lo)
        hi = "" if self.bracket_hi is None else _g(self.bracket_hi)
        return [_g(self.p), _g(self.q), _g(self.c), format_threshold(self.v_star), _g(self.cost),
                self.method, lo, hi, self.timestamp, self.tool_version]

    @classmethod
    def from_csv_row(cls, row: dict) -> "RunRecord":
        opt = lambda s: None if s == "" else float(s)  # noqa: E731
        return cls(float(row["p"]), float(row["q"]), float(row["c"]), parse_threshold(row["v_star"]),
                   float(row["cost"]), row["method"], opt(row["bracket_lo"]), opt(row["bracket_hi"]),
                   row["timestamp"], row["tool_version"])


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _params(parser, p, q, c) -> SystemParams:
    try:
        return SystemParams(p, q, c)
    except ValueError as e:
        parser.error(str(e))


def _add_params(sp, required=True):
    sp.add_argument("--p", type=float, required=required, help="fresh-packet arrival probability")
    sp.add_argument("--q", type=float, required=required, help="channel success probability")
    sp.add_argument("--c", type=float, required=required, help="cost per stored packet")


def cmd_optimize(args, parser) -> int:
    params = _params(parser, args.p, args.q, args.c)
    res = brute_force_threshold(params, args.v_search) if args.brute_force else find_optimal_threshold(params)
    br = res.bracket if isinstance(res.bracket, Bracket) else None
    rec = RunRecord(params.p, params.q, params.c, res.v_star, res.cost, res.method,
                    None if br is None else br.lo, None if br is None else br.hi,
                    _timestamp(), __version__)
    text = rec.to_json() + "\n" if args.json else _csv_text(RUN_FIELDS, [rec.csv_row()])
    _emit(text, args.out)
    return 0


def cmd_sweep(args, parser) -> int:
    values = args.values
    if not values:
        parser.error("--values must list at least one value")
    if any(b <= a for a, b in zip(values, values[1:])):
        parser.error("--values must be strictly increasing")
    fixed = {"p": args.p, "q": args.q, "c": args.c}
    missing = [k for k, v in fixed.items() if v is None and k != args.axis]
    if missing:
        parser.error(f"fixed parameter(s) required: {', '.join('--' + m for m in missing)}")
    points = []
    for x in values:
        fixed[args.axis] = x
        points.append(_params(parser, fixed["p"], fixed["q"], fixed["c"]))
    rows = []
    for x, params in zip(values, points):
        res = find_optimal_threshold(params)
        rows.append((x, res.v_star, res.cost))
    if args.json:
        text = json.dumps([{"axis_value": x, "v_star": format_threshold(v), "cost": f} for x, v, f in rows]) + "\n"
    else:
        text = _csv_text(SWEEP_FIELDS, [[_g(x), format_threshold(v), _g(f)] for x, v, f in rows])
    _emit(text, args.out)
    return 0


def cmd_solve_mdp(args, parser) -> int:
    if args.v_max < 2:
        parser.error("v-max must be >= 2")
    if args.tol <= 0:
        parser.error("tol must be positive")
    params = _params(parser, args.p, args.q, args.c)
    lines = []
    if args.alpha is not None:
        if not 0.0 < args.alpha < 1.0:
            parser.error("alpha must be in (0,1)")
        table, rep = discounted_value_iteration(params, args.alpha, args.v_max, args.tol, args.max_iter)
        thr = extract_threshold(greedy_policy(params, table))
        bad = check_monotone_in_age(table)
        lines.append(f"monotone in age: {'no' if bad else 'yes'}")
        if bad:
            lines.append(f"first violation: {bad[0]}")
        ok = rep.converged and not bad
    else:
        table, policy, rep = relative_value_iteration(params, args.v_max, args.tol, args.max_iter)
        thr = extract_threshold(policy)
        lines.append(f"gain: {rep.gain!r}")
        ok = rep.converged
    if isinstance(thr, NotThreshold):
        lines.append(f"threshold: none (age {thr.age}: {thr.reason})")
    else:
        lines.append(f"threshold: {format_threshold(thr)}")
    lines.append(f"iterations: {rep.iterations}")
    lines.append(f"residual: {rep.residual:.3e}")
    if not rep.converged:
        lines.append("status: not converged")
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if ok else 1


def cmd_simulate(args, parser) -> int:
    params = _params(parser, args.p, args.q, args.c)
    try:
        threshold = parse_threshold(args.threshold)
        configs = [SimConfig(args.horizon, s, args.burn_in) for s in args.seeds]
    except ValueError as e:
        parser.error(str(e))
    if args.jobs < 1:
        parser.error("jobs must be >= 1")
    if len(set(args.seeds)) != len(args.seeds):
        parser.error("seeds must be distinct")
    if args.jobs > 1:
        with ThreadPoolExecutor(args.jobs) as ex:
            runs = list(ex.map(lambda cfg: simulate(params, threshold, cfg), configs))
    else:
        runs = [simulate(params, threshold, cfg) for cfg in configs]
    thr = format_threshold(threshold)
    head = [_g(params.p), _g(params.q), _g(params.c), thr]
    rows = [[str(r.seed), *head, str(r.slots_counted), _g(r.avg_cost), _g(r.avg_age), _g(r.storage_rate), ""]
            for r in runs]
    pooled = merge(runs, params.c)
    rows.append(["pooled", *head, str(pooled.slots_counted), _g(pooled.avg_cost), _g(pooled.avg_age),
                 _g(pooled.storage_rate), _g(standard_error(runs))])
    _emit(_csv_text(SIM_FIELDS, rows), args.out)
    return 0


def cmd_validate(args, parser) -> int:
    from .validation import run_all

    results = run_all(quick=args.quick)
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        print("failed: " + "; ".join(failed))
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aoi-storage", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("optimize", help="optimal storage threshold")
    _add_params(sp)
    sp.add_argument("--brute-force", action="store_true", help="exhaustive scan instead of the bracketed search")
    sp.add_argument("--v-search", type=int, default=500, help="upper limit for --brute-force")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_optimize, sub=sp)

    sp = sub.add_parser("sweep", help="optimal threshold along one parameter axis")
    sp.add_argument("--axis", choices=("p", "q", "c"), required=True)
    sp.add_argument("--values", type=float, nargs="*", required=True)
    _add_params(sp, required=False)
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sweep, sub=sp)

    sp = sub.add_parser("solve-mdp", help="value iteration on the truncated MDP")
    _add_params(sp)
    sp.add_argument("--v-max", type=int, default=2000)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-iter", type=int, default=10**6)
    sp.add_argument("--alpha", type=float, help="discount factor; switches to discounted iteration")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_solve_mdp, sub=sp)

    sp = sub.add_parser("simulate", help="Monte Carlo run of a threshold policy")
    _add_params(sp)
    sp.add_argument("--threshold", required=True, help="integer age or 'never'")
    sp.add_argument("--horizon", type=int, default=1_000_000)
    sp.add_argument("--burn-in", type=int, default=10_000)
    sp.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    sp.add_argument("--jobs", type=int, default=1, help="seeds run in parallel threads")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate, sub=sp)

    sp = sub.add_parser("validate", help="run the acceptance checks")
    sp.add_argument("--quick", action="store_true", help="reduced grid, well under a minute")
    sp.set_defaults(func=cmd_validate, sub=sp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, args.sub)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
