"""Acceptance checks shared by ``aoi-storage validate`` and the test-suite.

Each check returns one or more :class:`CheckResult`; a criterion with
several independent clauses reports one result per clause.
"""

from __future__ import annotations

import contextlib
import io
import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from . import uncorrected
from .closed_form import NEVER, average_cost, format_threshold, never_store_cost, stationary_distribution
from .mdp import (
    check_monotone_in_age,
    check_switch_inequality,
    discounted_value_iteration,
    extract_threshold,
    relative_value_iteration,
)
from .model import SystemParams
from .optimizer import brute_force_threshold, find_optimal_threshold
from .oracles import summed_average_cost, truncated_chain_age_pmf
from .simulator import SimConfig, empirical_age_distribution, merge, simulate, total_variation

GRID = (0.2, 0.5, 0.8)
COSTS = (0.5, 2.0, 10.0)
PMF_THRESHOLDS = (2, 3, 5, 10, 25)
SWEEP = tuple(round(0.1 * i, 1) for i in range(1, 10))

# (p, q, c, threshold) points for the Monte Carlo cross-check
SIM_POINTS = (
    (0.5, 0.5, 1.0, 3),
    (0.8, 0.5, 0.5, 5),
    (0.5, 0.8, 2.0, 11),
    (0.7, 0.6, 2.0, 1),
    (0.6, 0.4, 10.0, 2),
    (0.8, 0.8, 0.5, 25),
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _pq_grid(quick: bool):
    pairs = list(itertools.product(GRID, GRID))
    return [(0.5, 0.5), (0.2, 0.8), (0.8, 0.2)] if quick else pairs


def _full_grid(quick: bool):
    return [(p, q, c) for (p, q) in _pq_grid(quick) for c in COSTS]


def check_pmf_vs_chain(quick: bool = False, v_max: int = 2000) -> list[CheckResult]:
    t0 = time.perf_counter()
    err = norm = raw = 0.0
    for p, q in _pq_grid(quick):
        params = SystemParams(p, q)
        for v_bar in PMF_THRESHOLDS:
            dist = stationary_distribution(params, v_bar)
            oracle = truncated_chain_age_pmf(params, v_bar, v_max)
            err = max(err, float(np.abs(dist.truncated_pmf(v_max) - oracle).max()))
            norm = max(norm, abs(dist.total_mass() - 1.0))
            h1, h2 = uncorrected.h1_h2(params, v_bar)
            raw = max(raw, abs(h1 - oracle[0]), abs(h2 - oracle[1]))
    dt = time.perf_counter() - t0
    ok = err < 1e-9 and norm < 1e-12 and dt < 30.0
    detail = (
        f"max|pmf - chain| = {err:.2e} (<1e-9), normalisation error {norm:.2e} (<1e-12), "
        f"runtime {dt:.1f}s (<30s); uncorrected h1/h2 off by up to {raw:.3f}"
    )
    return [CheckResult("1 closed-form pmf vs truncated chain", ok, detail, dt)]


def check_cost_formula(quick: bool = False) -> list[CheckResult]:
    t0 = time.perf_counter()
    worst = charge_gap = 0.0
    two_gap = corrected_two = 0.0
    lim_gap = corrected_lim = 0.0
    for p, q, c in _full_grid(quick):
        params = SystemParams(p, q, c)
        for v_bar in (1, *PMF_THRESHOLDS):
            worst = max(worst, abs(average_cost(params, v_bar) - summed_average_cost(params, v_bar)))
            # charging c per slot above threshold instead of c*p
            mass = stationary_distribution(params, v_bar).storing_mass()
            charge_gap = max(charge_gap, c * (1.0 - p) * mass)
        f2 = average_cost(params, 2)
        two_gap = max(two_gap, abs(f2 - uncorrected.cost_at_two(params)))
        corrected_two = max(corrected_two, abs(f2 - summed_average_cost(params, 2)))
        f200 = average_cost(params, 200)
        lim_gap = max(lim_gap, abs(f200 - uncorrected.never_store_cost(params)))
        corrected_lim = max(corrected_lim, abs(f200 - never_store_cost(params)))
    dt = time.perf_counter() - t0
    return [
        CheckResult(
            "2a closed-form cost vs direct summation",
            worst < 1e-10,
            f"max gap {worst:.2e} (<1e-10) over thresholds 1,2,3,5,10,25; "
            f"a per-slot charge of c instead of c*p would shift f by up to {charge_gap:.3f}",
            dt,
        ),
        CheckResult(
            "2b f(2) vs uncorrected threshold-2 expression",
            two_gap < 1e-12,
            f"max gap {two_gap:.3e} (<1e-12); f(2) vs direct summation {corrected_two:.1e}",
            0.0,
        ),
        CheckResult(
            "2c f(200) vs uncorrected never-store limit",
            lim_gap < 1e-6,
            f"max gap {lim_gap:.3e} (<1e-6); |f(200) - 1/(pq)| = {corrected_lim:.1e}",
            0.0,
        ),
    ]


def check_optimizer_agreement(quick: bool = False) -> list[CheckResult]:
    t0 = time.perf_counter()
    bad = []
    for p, q, c in _full_grid(quick):
        params = SystemParams(p, q, c)
        a = find_optimal_threshold(params)
        b = brute_force_threshold(params, 500)
        if a.v_star != b.v_star or abs(a.cost - b.cost) > 1e-12:
            bad.append((p, q, c, a.v_star, b.v_star))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 5.0
    n = len(_full_grid(quick))
    return [CheckResult("3 bracketed search vs brute force", ok, f"{n - len(bad)}/{n} agree, runtime {dt:.2f}s (<5s) {bad or ''}", dt)]


def check_mdp_structure(quick: bool = False, v_max: int = 2000, alpha: float = 0.95) -> list[CheckResult]:
    t0 = time.perf_counter()
    not_thr, gain_gap, mono, switch, unconverged = [], 0.0, 0, 0, []
    for p, q, c in _full_grid(quick):
        params = SystemParams(p, q, c)
        bias, policy, rep = relative_value_iteration(params, v_max=v_max)
        disc, drep = discounted_value_iteration(params, alpha, v_max=v_max)
        if not (rep.converged and drep.converged):
            unconverged.append((p, q, c))
        thr = extract_threshold(policy)
        if not isinstance(thr, (int, float)):
            not_thr.append((p, q, c, thr))
        opt = find_optimal_threshold(params)
        gain_gap = max(gain_gap, abs(rep.gain - opt.cost))
        mono += len(check_monotone_in_age(bias, 1e-10)) + len(check_monotone_in_age(disc, 1e-10))
        switch += len(check_switch_inequality(disc, 1e-9))
    dt = time.perf_counter() - t0
    fast = dt < 300.0
    conv = f"; unconverged {unconverged}" if unconverged else ""
    return [
        CheckResult("4a greedy policy is threshold-type", not not_thr and not unconverged, f"violations {not_thr}{conv}", dt),
        CheckResult("4b gain equals f(v*)", gain_gap < 1e-6, f"max |gain - f(v*)| = {gain_gap:.2e} (<1e-6)", 0.0),
        CheckResult("4c value monotone in age", mono == 0, f"{mono} violations at tol 1e-10 (bias and discounted)", 0.0),
        CheckResult(
            "4d buffered-advantage inequality",
            switch == 0 and fast,
            f"{switch} violations at tol 1e-9 (alpha={alpha}); total runtime {dt:.1f}s (<300s)",
            0.0,
        ),
    ]


def check_simulation(quick: bool = False, horizon: int = 10**7, seeds=(1, 2, 3, 4, 5)) -> list[CheckResult]:
    t0 = time.perf_counter()
    points = SIM_POINTS[:2] if quick else SIM_POINTS
    if quick:
        horizon = 10**6
    worst_rel = worst_tv = 0.0
    for p, q, c, v_bar in points:
        params = SystemParams(p, q, c)
        runs = [simulate(params, v_bar, SimConfig(horizon, s, 10_000)) for s in seeds]
        pooled = merge(runs, c)
        target = average_cost(params, v_bar)
        worst_rel = max(worst_rel, abs(pooled.avg_cost - target) / target)
        emp = empirical_age_distribution(pooled)[1:]
        ana = stationary_distribution(params, v_bar).truncated_pmf(max(emp.size, 2000))
        worst_tv = max(worst_tv, total_variation(emp, ana))
    dt = time.perf_counter() - t0
    ok = worst_rel < 0.01 and worst_tv < 0.005 and (quick or dt < 600.0)
    detail = (
        f"{len(points)} points x {len(seeds)} seeds x {horizon:.0e} slots: max rel cost error "
        f"{worst_rel:.2e} (<1%), max TV {worst_tv:.2e} (<0.005), runtime {dt:.0f}s (<600s)"
    )
    return [CheckResult("5 simulation vs closed form", ok, detail, dt)]


def _non_decreasing(xs) -> bool:
    return all(a <= b for a, b in zip(xs, xs[1:]))


def check_threshold_monotonicity(quick: bool = False) -> list[CheckResult]:
    t0 = time.perf_counter()
    fixed = [(0.5, 2.0)] if quick else list(itertools.product(GRID, COSTS))
    bad = []
    for other, c in fixed:
        by_p = [find_optimal_threshold(SystemParams(p, other, c)).v_star for p in SWEEP]
        by_q = [find_optimal_threshold(SystemParams(other, q, c)).v_star for q in SWEEP]
        if not _non_decreasing(by_p):
            bad.append(("p", other, c, by_p))
        if not _non_decreasing(by_q):
            bad.append(("q", other, c, by_q))
    dt = time.perf_counter() - t0
    return [CheckResult("6 v* non-decreasing in p and in q", not bad, f"{2 * len(fixed)} sweeps over 0.1..0.9 {bad or ''}", dt)]


def check_degenerate_costs(quick: bool = False) -> list[CheckResult]:
    t0 = time.perf_counter()
    zero = {(p, q): find_optimal_threshold(SystemParams(p, q, 0.0)).v_star for p, q in _pq_grid(quick)}
    huge = {(p, q): find_optimal_threshold(SystemParams(p, q, 1e6)) for p, q in _pq_grid(quick)}
    gap = max(abs(r.cost - uncorrected.never_store_cost(SystemParams(p, q, 1e6))) for (p, q), r in huge.items())
    corrected = max(abs(r.cost - 1.0 / (p * q)) for (p, q), r in huge.items())
    dt = time.perf_counter() - t0
    zero_txt = sorted({format_threshold(v) for v in zero.values()})
    margin = min(average_cost(SystemParams(p, q), 2) - average_cost(SystemParams(p, q), 1) for p, q in zero)
    return [
        CheckResult("7a c=0 gives v*=2", all(v == 2 for v in zero.values()), f"v* values seen: {zero_txt}; f(2) - f(1) >= {margin:.3f}", dt),
        CheckResult("7b c=1e6 gives NEVER", all(r.v_star == NEVER for r in huge.values()), f"{sum(r.v_star == NEVER for r in huge.values())}/{len(huge)} NEVER", 0.0),
        CheckResult(
            "7c c=1e6 cost equals uncorrected never-store expression",
            gap < 1e-12,
            f"max gap {gap:.3e} (<1e-12); gap to 1/(pq) {corrected:.1e}",
            0.0,
        ),
    ]


def check_determinism(quick: bool = False) -> list[CheckResult]:
    from .cli import main

    t0 = time.perf_counter()
    argv = ["simulate", "--p", "0.4", "--q", "0.7", "--c", "1.5", "--threshold", "4",
            "--horizon", "200000", "--burn-in", "1000", "--seeds", "3", "9"]
    outs = []
    for _ in range(2):
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = main(argv)
        outs.append((code, buf.getvalue().encode()))
    dt = time.perf_counter() - t0
    same = outs[0] == outs[1] and outs[0][0] == 0
    return [CheckResult("8 simulate output is byte-identical across runs", same, f"{len(outs[0][1])} bytes", dt)]


CHECKS = (
    check_pmf_vs_chain,
    check_cost_formula,
    check_optimizer_agreement,
    check_mdp_structure,
    check_simulation,
    check_threshold_monotonicity,
    check_degenerate_costs,
    check_determinism,
)


def run_all(quick: bool = False, report=print) -> list[CheckResult]:
    results = []
    for check in CHECKS:
        for r in check(quick):
            report(r.line())
            results.append(r)
    return results
