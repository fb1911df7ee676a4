import math

import pytest
from hypothesis import given, strategies as st

from aoi_storage.model import (
    STORE,
    SKIP,
    State,
    SystemParams,
    enumerate_states,
    stage_cost,
    transition,
)

probs = st.floats(0.01, 0.99)


@pytest.mark.parametrize("field,kw", [("p", dict(p=0.0, q=0.5)), ("p", dict(p=1.5, q=0.5)),
                                      ("q", dict(p=0.5, q=1.0)), ("c", dict(p=0.5, q=0.5, c=-1.0))])
def test_params_reject_out_of_range(field, kw):
    with pytest.raises(ValueError, match=f"^{field} must"):
        SystemParams(**kw)


def test_params_reject_nan():
    with pytest.raises(ValueError):
        SystemParams(float("nan"), 0.5)


def test_store_then_deliver_fresh():
    entries = dict(transition(SystemParams(0.3, 0.7), State(5, 1, 0), STORE))
    assert entries[State(1, 1, 1)] == pytest.approx(0.21)


def test_idle_slot_advances_age():
    params = SystemParams(0.3, 0.7)
    entries = transition(params, State(4, 0, 0), SKIP)
    assert {(e.next, round(e.prob, 12)) for e in entries} == {(State(5, 1, 0), 0.3), (State(5, 0, 0), 0.7)}


def test_buffered_delivery():
    entries = dict(transition(SystemParams(0.5, 0.5), State(3, 0, 1), SKIP))
    assert entries == pytest.approx({State(2, 1, 0): 0.25, State(2, 0, 0): 0.25,
                                     State(4, 1, 0): 0.25, State(4, 0, 0): 0.25})


def test_store_without_arrival_is_rejected():
    with pytest.raises(ValueError):
        transition(SystemParams(0.5, 0.5), State(3, 0, 0), STORE)


def test_stage_costs():
    params = SystemParams(0.4, 0.7, c=2.0)
    assert stage_cost(params, State(5, 1, 0), STORE) == pytest.approx(4.5)
    assert stage_cost(params, State(5, 1, 1), STORE) == pytest.approx(4.5)
    assert stage_cost(params, State(7, 0, 0), SKIP) == 8
    assert stage_cost(SystemParams(0.5, 0.5), State(4, 0, 1), SKIP) == pytest.approx(3.5)


def test_enumeration():
    states = enumerate_states(2)
    assert len(states) == 8 and states[0] == State(1, 0, 0)
    big = enumerate_states(100)
    assert len(big) == 400 == len(set(big))
    with pytest.raises(ValueError):
        enumerate_states(1)


@given(probs, probs, st.integers(1, 50), st.integers(0, 1), st.integers(0, 1), st.integers(0, 1))
def test_transition_rows_are_distributions(p, q, v, lam, b, a):
    a = a if lam else 0
    entries = transition(SystemParams(p, q), State(v, lam, b), a)
    assert math.isclose(sum(e.prob for e in entries), 1.0, abs_tol=1e-12)
    for e in entries:
        assert e.prob >= 0
        assert e.next.v in (1, 2, v + 1)
        # only a stored packet can sit in the buffer next slot
        assert e.next.b == (a if lam else 0)
