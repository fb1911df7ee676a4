"""Problem instance, state space, transition kernel and stage cost.

A base station sees a fresh update with probability ``p`` per slot and
delivers whatever it transmits with probability ``q``.  It may keep the
fresh packet in a one-slot buffer for a price ``c``; the buffered packet is
sent in the next slot only if no newer packet shows up, and is dropped at
the end of that slot either way.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

SKIP = 0
STORE = 1


@dataclass(frozen=True)
class SystemParams:
    p: float
    q: float
    c: float = 0.0

    def __post_init__(self):
        for name in ("p", "q"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must be in (0,1), got {value!r}")
        if not self.c >= 0.0:
            raise ValueError(f"c must be >= 0, got {self.c!r}")

    @property
    def pq(self) -> float:
        return self.p * self.q


class State(NamedTuple):
    v: int
    lam: int
    b: int


class TransitionEntry(NamedTuple):
    next: State
    prob: float


def check_state(s: State) -> None:
    if s.v < 1 or s.lam not in (0, 1) or s.b not in (0, 1):
        raise ValueError(f"invalid state {s}")


def check_action(s: State, a: int) -> None:
    if a not in (SKIP, STORE):
        raise ValueError(f"action must be 0 or 1, got {a!r}")
    if a == STORE and s.lam == 0:
        raise ValueError(f"cannot store in {s}: no fresh packet")


def transition(params: SystemParams, s: State, a: int) -> list[TransitionEntry]:
    """Sparse successor distribution of ``s`` under action ``a``.

    The age is not truncated here; callers that work on a finite grid apply
    their own cap.  Zero-probability successors are left out.
    """
    check_state(s)
    check_action(s, a)
    p, q = params.p, params.q
    if s.lam == 1:
        # fresh packet on air; the buffer flag only records the decision
        ages = ((1, q), (s.v + 1, 1.0 - q))
        nb = a
    elif s.b == 1:
        ages = ((2, q), (s.v + 1, 1.0 - q))
        nb = 0
    else:
        ages = ((s.v + 1, 1.0),)
        nb = 0
    out = []
    for v_next, pv in ages:
        for lam_next, pl in ((1, p), (0, 1.0 - p)):
            out.append(TransitionEntry(State(v_next, lam_next, nb), pv * pl))
    return out


def stage_cost(params: SystemParams, s: State, a: int) -> float:
    """Storage charge plus the expected age in the next slot."""
    expected_age = sum(e.next.v * e.prob for e in transition(params, s, a))
    return a * params.c + expected_age


def enumerate_states(v_max: int) -> list[State]:
    if v_max < 2:
        raise ValueError(f"v_max must be >= 2, got {v_max}")
    return [State(v, lam, b) for v in range(1, v_max + 1) for lam in (0, 1) for b in (0, 1)]
