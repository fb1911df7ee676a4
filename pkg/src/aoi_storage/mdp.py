"""Value iteration on the age-truncated storage MDP.

Tables are numpy arrays of shape ``(v_max, 2, 2)`` indexed ``[v-1, lam, b]``.
Ages are capped: a successor age of ``v_max + 1`` is folded back onto
``v_max``, which keeps every row stochastic.  Stage costs are the untruncated
ones from :func:`aoi_storage.model.stage_cost`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .closed_form import NEVER, check_threshold
from .model import SystemParams, State

log = logging.getLogger(__name__)

ANCHOR = State(1, 1, 1)


@dataclass
class ValueTable:
    v_max: int
    values: np.ndarray
    kind: str  # "discounted" or "bias"
    alpha: float | None = None

    def __post_init__(self):
        if self.values.shape != (self.v_max, 2, 2):
            raise ValueError(f"values must have shape ({self.v_max}, 2, 2), got {self.values.shape}")
        if self.kind == "discounted" and not (self.alpha is not None and 0.0 < self.alpha < 1.0):
            raise ValueError("discounted tables need alpha in (0,1)")
        if not np.isfinite(self.values).all():
            raise ValueError("value table has non-finite entries")

    def __getitem__(self, s: State) -> float:
        return float(self.values[s.v - 1, s.lam, s.b])


@dataclass
class TabularPolicy:
    v_max: int
    actions: np.ndarray  # int8, same layout as ValueTable.values

    def __post_init__(self):
        self.actions = np.asarray(self.actions, dtype=np.int8)
        if self.actions.shape != (self.v_max, 2, 2):
            raise ValueError(f"actions must have shape ({self.v_max}, 2, 2)")
        if self.actions[:, 0, :].any():
            raise ValueError("storing is only allowed when a fresh packet is present")

    def __getitem__(self, s: State) -> int:
        return int(self.actions[min(s.v, self.v_max) - 1, s.lam, s.b])

    @classmethod
    def from_threshold(cls, v_bar, v_max: int) -> "TabularPolicy":
        v_bar = check_threshold(v_bar)
        acts = np.zeros((v_max, 2, 2), dtype=np.int8)
        if v_bar != NEVER:
            acts[v_bar - 1:, 1, :] = 1
        return cls(v_max, acts)


@dataclass
class SolveReport:
    iterations: int
    residual: float
    converged: bool
    gain: float | None = None


class _Bellman:
    """Q-values of the capped MDP for a given continuation table."""

    def __init__(self, params: SystemParams, v_max: int):
        if v_max < 2:
            raise ValueError(f"v_max must be >= 2, got {v_max}")
        p, q, c = params.p, params.q, params.c
        self.p = p
        self.q = q
        self.v_max = v_max
        ages = np.arange(1, v_max + 1, dtype=float)
        self.up = np.minimum(np.arange(1, v_max + 1), v_max - 1)  # index of min(v+1, v_max)
        self.cost_fresh = q * 1.0 + (1.0 - q) * (ages + 1.0)
        self.cost_buffered = q * 2.0 + (1.0 - q) * (ages + 1.0)
        self.cost_idle = ages + 1.0
        self.c = c

    def q_values(self, V: np.ndarray, beta: float):
        """Return ``(Q_skip, Q_store, Q_buffered, Q_idle)`` each of shape ``(v_max,)``.

        ``Q_skip``/``Q_store`` apply to states with a fresh packet (either
        buffer flag); the other two are the forced actions when ``lam = 0``.
        """
        p, q, up = self.p, self.q, self.up
        W = p * V[:, 1, :] + (1.0 - p) * V[:, 0, :]  # W[v-1, b'] averaged over next arrival
        q_skip = self.cost_fresh + beta * (q * W[0, 0] + (1.0 - q) * W[up, 0])
        q_store = self.c + self.cost_fresh + beta * (q * W[0, 1] + (1.0 - q) * W[up, 1])
        q_buf = self.cost_buffered + beta * (q * W[1, 0] + (1.0 - q) * W[up, 0])
        q_idle = self.cost_idle + beta * W[up, 0]
        return q_skip, q_store, q_buf, q_idle

    def apply(self, V: np.ndarray, beta: float) -> np.ndarray:
        q_skip, q_store, q_buf, q_idle = self.q_values(V, beta)
        out = np.empty_like(V)
        best = np.minimum(q_skip, q_store)
        out[:, 1, 0] = best
        out[:, 1, 1] = best
        out[:, 0, 1] = q_buf
        out[:, 0, 0] = q_idle
        return out


def discounted_value_iteration(
    params: SystemParams,
    alpha: float,
    v_max: int = 2000,
    tol: float = 1e-10,
    max_iter: int = 10**6,
    callback: Callable[[int, np.ndarray], None] | None = None,
) -> tuple[ValueTable, SolveReport]:
    """Iterate ``V_n = min_a {C + alpha P_a V_{n-1}}`` from ``V_0 = 0``.

    Stops once the sup-norm change drops below ``tol``.  ``callback(n, V_n)``
    sees every iterate.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    op = _Bellman(params, v_max)
    V = np.zeros((v_max, 2, 2))
    delta = np.inf
    n = 0
    for n in range(1, max_iter + 1):
        new = op.apply(V, alpha)
        delta = float(np.max(np.abs(new - V)))
        V = new
        if callback is not None:
            callback(n, V)
        if delta < tol:
            break
    converged = delta < tol
    if not converged:
        log.warning("discounted value iteration stopped after %d iterations, residual %.3e", n, delta)
    return ValueTable(v_max, V, "discounted", alpha), SolveReport(n, delta, converged)


def relative_value_iteration(
    params: SystemParams,
    v_max: int = 2000,
    tol: float = 1e-10,
    max_iter: int = 10**6,
) -> tuple[ValueTable, TabularPolicy, SolveReport]:
    """Average-cost relative value iteration anchored at state ``(1, 1, 1)``.

    Convergence is judged on the span of ``T h - h``; the gain is
    ``(T h)(anchor)`` at the final iterate.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    op = _Bellman(params, v_max)
    h = np.zeros((v_max, 2, 2))
    a = (ANCHOR.v - 1, ANCHOR.lam, ANCHOR.b)
    span = np.inf
    gain = np.nan
    n = 0
    for n in range(1, max_iter + 1):
        Th = op.apply(h, 1.0)
        diff = Th - h
        span = float(diff.max() - diff.min())
        gain = float(Th[a])
        h = Th - gain
        if span < tol:
            break
    converged = span < tol
    if not converged:
        log.warning("relative value iteration stopped after %d iterations, span %.3e", n, span)
    table = ValueTable(v_max, h, "bias")
    return table, greedy_policy(params, table), SolveReport(n, span, converged, gain)


def greedy_policy(params: SystemParams, V: ValueTable) -> TabularPolicy:
    """One-step greedy policy; stores only when strictly cheaper."""
    beta = V.alpha if V.kind == "discounted" else 1.0
    q_skip, q_store, _, _ = _Bellman(params, V.v_max).q_values(V.values, beta)
    acts = np.zeros((V.v_max, 2, 2), dtype=np.int8)
    store = (q_store < q_skip).astype(np.int8)
    acts[:, 1, 0] = store
    acts[:, 1, 1] = store
    return TabularPolicy(V.v_max, acts)


class MonotoneViolation(NamedTuple):
    lam: int
    b: int
    v_low: int
    v_high: int
    drop: float


def check_monotone_in_age(V: ValueTable, tol: float = 1e-10) -> list[MonotoneViolation]:
    """Adjacent-age decreases in ``V(., lam, b)``; the capped age ``v_max`` is skipped."""
    out = []
    vals = V.values[: V.v_max - 1]
    for lam in (0, 1):
        for b in (0, 1):
            col = vals[:, lam, b]
            drops = col[:-1] - col[1:]
            for i in np.flatnonzero(drops > tol):
                out.append(MonotoneViolation(lam, b, int(i) + 1, int(i) + 2, float(drops[i])))
    return out


def check_switch_inequality(V: ValueTable, tol: float = 1e-9) -> list[int]:
    """Ages ``v+1`` at which the buffered-packet advantage fails to be non-increasing.

    With ``D(a) = V(a,0,1) - V(a,0,0)``, every ``v <= v_max - 3`` must satisfy
    ``D(v+2) <= D(v+1) + tol``.
    """
    D = V.values[:, 0, 1] - V.values[:, 0, 0]
    # D[i] is age i+1; compare ages 1..v_max-2 with their successors
    bad = np.flatnonzero(D[1 : V.v_max - 1] > D[0 : V.v_max - 2] + tol)
    return [int(i) + 1 for i in bad]


@dataclass(frozen=True)
class NotThreshold:
    age: int
    reason: str


def extract_threshold(policy: TabularPolicy) -> int | float | NotThreshold:
    """Read a threshold off a tabular policy, or report the first age breaking the pattern."""
    fresh = policy.actions[:, 1, :]
    seen_store = False
    first = None
    for i in range(policy.v_max):
        a0, a1 = int(fresh[i, 0]), int(fresh[i, 1])
        if a0 != a1:
            return NotThreshold(i + 1, "decision depends on buffer flag")
        if a0:
            if not seen_store:
                seen_store, first = True, i + 1
        elif seen_store:
            return NotThreshold(i + 1, "stops storing after storing at a lower age")
    return first if seen_store else NEVER
