import math

import numpy as np
import pytest

import aoi_storage.simulator as sim
from aoi_storage.closed_form import NEVER, average_cost, stationary_distribution
from aoi_storage.mdp import TabularPolicy
from aoi_storage.model import SystemParams
from aoi_storage.simulator import (
    InvariantError,
    SimConfig,
    empirical_age_distribution,
    merge,
    simulate,
    standard_error,
    total_variation,
)


def _runs(params, policy, horizon, seeds=(1, 2, 3, 4, 5)):
    return [simulate(params, policy, SimConfig(horizon, s, 10_000)) for s in seeds]


def test_never_policy_long_run():
    params = SystemParams(0.5, 0.5, 7.0)
    runs = _runs(params, NEVER, 10**7)
    pooled = merge(runs, params.c)
    assert pooled.storage_rate == 0
    assert abs(pooled.avg_cost - 4.0) < 0.04
    assert abs(pooled.avg_cost - 4.0) < 3 * standard_error(runs)


def test_threshold_policy_matches_closed_form():
    params = SystemParams(0.5, 0.5, 1.0)
    pooled = merge(_runs(params, 3, 10**7), params.c)
    assert abs(pooled.avg_cost / average_cost(params, 3) - 1) < 0.01
    emp = empirical_age_distribution(pooled)
    assert emp[0] == 0 and emp.sum() == pytest.approx(1.0)
    ana = stationary_distribution(params, 3).truncated_pmf(2000)
    assert total_variation(emp[1:], ana) < 0.005


def test_geometric_step_at_threshold():
    params = SystemParams(0.6, 0.5, 1.0)
    v_bar = 4
    runs = _runs(params, v_bar, 2 * 10**6)
    ratios = []
    for r in runs:
        h = r.age_histogram
        ratios.append(h[v_bar + 1] / h[v_bar])
    se = np.std(ratios, ddof=1) / math.sqrt(len(ratios))
    assert abs(np.mean(ratios) - (1 - params.pq)) < 3 * se + 1e-3


def test_same_seed_same_result():
    params = SystemParams(0.4, 0.7, 1.5)
    a = simulate(params, 4, SimConfig(300_000, 9, 1000))
    b = simulate(params, 4, SimConfig(300_000, 9, 1000))
    assert a.avg_cost == b.avg_cost
    assert np.array_equal(a.age_histogram, b.age_histogram)
    c = simulate(params, 4, SimConfig(300_000, 10, 1000))
    assert c.avg_cost != a.avg_cost


def test_chunking_does_not_change_results(monkeypatch):
    params = SystemParams(0.4, 0.7, 1.5)
    whole = simulate(params, 3, SimConfig(50_000, 2, 777))
    monkeypatch.setattr(sim, "CHUNK", 999)
    pieces = sim.simulate(params, 3, SimConfig(50_000, 2, 777))
    assert whole.avg_cost == pieces.avg_cost
    assert np.array_equal(whole.age_histogram, pieces.age_histogram)


def test_tabular_policy_equals_threshold():
    params = SystemParams(0.3, 0.8, 2.0)
    cfg = SimConfig(200_000, 4, 100)
    a = simulate(params, 6, cfg)
    b = simulate(params, TabularPolicy.from_threshold(6, 40), cfg)
    assert a.avg_cost == b.avg_cost


def test_invariant_checker_flags_bad_traces():
    u = np.array([[0.9, 0.1], [0.9, 0.1], [0.9, 0.9]])  # no arrivals
    ages = np.array([3, 4, 5])
    with pytest.raises(InvariantError, match="without a fresh arrival"):
        sim._check_chunk(u, 0.5, 0.5, ages, np.array([0, 1, 0], dtype=np.int8), 6, 0)
    with pytest.raises(InvariantError, match="other than 1 or 2"):
        sim._check_chunk(u, 0.5, 0.5, np.array([3, 4, 3]), np.zeros(3, dtype=np.int8), 4, 0)
    with pytest.raises(InvariantError, match="buffered delivery"):
        sim._check_chunk(u, 0.5, 0.5, np.array([3, 2, 3]), np.zeros(3, dtype=np.int8), 4, 0)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(100, 1, 100)
    with pytest.raises(ValueError):
        SimConfig(0, 1, 0)
    with pytest.raises(ValueError):
        SimConfig(100, -1, 0)


def test_merge_and_error_helpers():
    params = SystemParams(0.5, 0.5, 1.0)
    runs = _runs(params, 2, 50_000, seeds=(1, 2))
    pooled = merge(runs, params.c)
    assert pooled.slots_counted == sum(r.slots_counted for r in runs)
    assert pooled.avg_cost == pytest.approx(np.mean([r.avg_cost for r in runs]))
    assert math.isnan(standard_error(runs[:1]))
    assert total_variation(np.array([1.0]), np.array([0.0, 1.0])) == 1.0
