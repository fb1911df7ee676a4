import logging

import numpy as np
import pytest

from aoi_storage.closed_form import NEVER, average_cost
from aoi_storage.mdp import (
    NotThreshold,
    TabularPolicy,
    ValueTable,
    _Bellman,
    check_monotone_in_age,
    check_switch_inequality,
    discounted_value_iteration,
    extract_threshold,
    greedy_policy,
    relative_value_iteration,
)
from aoi_storage.model import STORE, SKIP, State, SystemParams, enumerate_states, stage_cost, transition
from aoi_storage.optimizer import find_optimal_threshold


def _dense_bellman(params, V, beta):
    """Reference Bellman update built state by state from the model."""
    v_max = V.shape[0]
    out = np.empty_like(V)
    for s in enumerate_states(v_max):
        best = np.inf
        for a in ((SKIP, STORE) if s.lam else (SKIP,)):
            nxt = sum(e.prob * V[min(e.next.v, v_max) - 1, e.next.lam, e.next.b] for e in transition(params, s, a))
            best = min(best, stage_cost(params, s, a) + beta * nxt)
        out[s.v - 1, s.lam, s.b] = best
    return out


@pytest.mark.parametrize("beta", [0.9, 1.0])
def test_vectorised_operator_matches_model(beta):
    params = SystemParams(0.35, 0.6, 1.7)
    V = np.random.default_rng(3).normal(size=(25, 2, 2))
    fast = _Bellman(params, 25).apply(V, beta)
    assert np.allclose(fast, _dense_bellman(params, V, beta), atol=1e-12)


def test_first_iterate_is_one_step_cost():
    params = SystemParams(0.5, 0.5, 1.0)
    seen = {}
    discounted_value_iteration(params, 0.9, v_max=20, max_iter=1,
                               callback=lambda n, V: seen.setdefault(n, V.copy()))
    for s in enumerate_states(20):
        acts = (SKIP, STORE) if s.lam else (SKIP,)
        assert seen[1][s.v - 1, s.lam, s.b] == pytest.approx(min(stage_cost(params, s, a) for a in acts))


def test_iterates_non_decreasing():
    prev = [np.zeros((500, 2, 2))]

    def watch(n, V):
        assert (V >= prev[0] - 1e-12).all(), f"iterate {n} decreased"
        prev[0] = V.copy()

    _, rep = discounted_value_iteration(SystemParams(0.5, 0.5, 1.0), 0.9, v_max=500, callback=watch)
    assert rep.converged and rep.iterations >= 1 and rep.residual >= 0


def test_non_convergence_is_reported(caplog):
    with caplog.at_level(logging.WARNING):
        _, rep = discounted_value_iteration(SystemParams(0.5, 0.5, 1.0), 0.99, v_max=50, max_iter=3)
    assert not rep.converged and rep.iterations == 3
    assert "stopped after" in caplog.text
    _, _, rep = relative_value_iteration(SystemParams(0.5, 0.5, 1.0), v_max=50, max_iter=2)
    assert not rep.converged


def test_ties_break_toward_skipping():
    # zero continuation and zero charge make both actions cost the same
    table = ValueTable(10, np.zeros((10, 2, 2)), "discounted", 0.5)
    pol = greedy_policy(SystemParams(0.5, 0.5, 0.0), table)
    assert not pol.actions.any()


def test_free_storage_stores_everywhere():
    _, pol, rep = relative_value_iteration(SystemParams(0.5, 0.5, 0.0), v_max=400)
    assert rep.converged
    assert pol.actions[:, 1, :].all()
    assert not pol.actions[:, 0, :].any()


def test_prohibitive_charge_never_stores():
    _, pol, rep = relative_value_iteration(SystemParams(0.5, 0.5, 1e6), v_max=400)
    assert extract_threshold(pol) == NEVER
    assert rep.gain == pytest.approx(4.0, abs=1e-8)


@pytest.mark.parametrize("p,q,c", [(0.3, 0.7, 2.0), (0.2, 0.2, 0.5), (0.8, 0.5, 10.0), (0.5, 0.5, 2.0)])
def test_threshold_and_gain_match_closed_form(p, q, c):
    params = SystemParams(p, q, c)
    _, pol, rep = relative_value_iteration(params, v_max=1500)
    best = find_optimal_threshold(params)
    assert extract_threshold(pol) == best.v_star
    assert rep.gain == pytest.approx(best.cost, abs=1e-8)
    assert rep.gain == pytest.approx(average_cost(params, best.v_star), abs=1e-8)


def test_gain_insensitive_to_cap():
    params = SystemParams(0.5, 0.8, 3.0)
    g = [relative_value_iteration(params, v_max=v)[2].gain for v in (1000, 2000)]
    assert abs(g[0] - g[1]) < 1e-10


def test_structural_checks_on_converged_tables():
    params = SystemParams(0.6, 0.4, 2.0)
    disc, rep = discounted_value_iteration(params, 0.95, v_max=600)
    assert rep.converged
    assert check_monotone_in_age(disc) == []
    assert check_switch_inequality(disc) == []
    bias, _, _ = relative_value_iteration(params, v_max=600)
    assert check_monotone_in_age(bias) == []


def test_structural_checks_catch_violations():
    disc, _ = discounted_value_iteration(SystemParams(0.6, 0.4, 2.0), 0.95, v_max=100)
    vals = disc.values.copy()
    vals[[10, 40]] = vals[[40, 10]]
    broken = ValueTable(100, vals, "discounted", 0.95)
    bad = check_monotone_in_age(broken)
    assert bad and {(v.v_low, v.v_high) for v in bad} >= {(40, 41)}
    vals = disc.values.copy()
    vals[20, 0, 1] += 5.0
    assert 20 in check_switch_inequality(ValueTable(100, vals, "discounted", 0.95))


def test_extract_threshold_cases():
    assert extract_threshold(TabularPolicy.from_threshold(4, 30)) == 4
    assert extract_threshold(TabularPolicy.from_threshold(NEVER, 30)) == NEVER
    acts = np.zeros((30, 2, 2), dtype=np.int8)
    acts[2:4, 1, :] = 1  # stores at ages 3 and 4 only
    assert extract_threshold(TabularPolicy(30, acts)) == NotThreshold(5, "stops storing after storing at a lower age")
    acts = np.zeros((30, 2, 2), dtype=np.int8)
    acts[5:, 1, 1] = 1
    witness = extract_threshold(TabularPolicy(30, acts))
    assert isinstance(witness, NotThreshold) and witness.age == 6


def test_policy_and_table_validation():
    acts = np.zeros((5, 2, 2), dtype=np.int8)
    acts[2, 0, 0] = 1
    with pytest.raises(ValueError):
        TabularPolicy(5, acts)
    with pytest.raises(ValueError):
        ValueTable(5, np.zeros((4, 2, 2)), "bias")
    with pytest.raises(ValueError):
        ValueTable(5, np.zeros((5, 2, 2)), "discounted", 1.0)
    with pytest.raises(ValueError):
        discounted_value_iteration(SystemParams(0.5, 0.5), 0.9, v_max=1)
    pol = TabularPolicy.from_threshold(3, 10)
    assert pol[State(50, 1, 0)] == 1 and pol[State(2, 1, 1)] == 0
