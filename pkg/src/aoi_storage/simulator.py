"""Slot-level Monte Carlo of the storage system.

Each slot consumes exactly two uniforms from a Philox stream, arrival first
and channel outcome second, whether or not the second one is needed.  The
stream is read in chunks, so results do not depend on the chunk size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .closed_form import NEVER, check_threshold
from .mdp import TabularPolicy
from .model import SystemParams

CHUNK = 1 << 20


@dataclass(frozen=True)
class SimConfig:
    horizon: int = 1_000_000
    seed: int = 1
    burn_in: int = 10_000

    def __post_init__(self):
        if self.horizon < 1 or self.burn_in < 0:
            raise ValueError("horizon must be positive and burn_in non-negative")
        if self.horizon <= self.burn_in:
            raise ValueError(f"horizon ({self.horizon}) must exceed burn_in ({self.burn_in})")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class SimStats:
    avg_cost: float
    avg_age: float
    storage_rate: float
    age_histogram: np.ndarray  # counts indexed by age; entry 0 is always 0
    slots_counted: int
    seed: int | None = None


class InvariantError(AssertionError):
    pass


@numba.njit(cache=True, nogil=True)
def _run(u, p, q, table, age, buf, ages_out, stores_out):
    m = table.shape[0]
    for t in range(u.shape[0]):
        ages_out[t] = age
        success = u[t, 1] < q
        if u[t, 0] < p:
            a = table[min(age, m) - 1, buf]
            stores_out[t] = a
            age = 1 if success else age + 1
            buf = a
        else:
            stores_out[t] = 0
            age = 2 if (buf == 1 and success) else age + 1
            buf = 0
    return age, buf


def _policy_table(policy) -> np.ndarray:
    """Store decisions for a fresh arrival, rows by age (last row repeats), columns by buffer flag."""
    if isinstance(policy, TabularPolicy):
        return np.ascontiguousarray(policy.actions[:, 1, :])
    v_bar = check_threshold(policy)
    if v_bar == NEVER:
        return np.zeros((1, 2), dtype=np.int8)
    table = np.zeros((v_bar, 2), dtype=np.int8)
    table[v_bar - 1] = 1
    return table


def _check_chunk(u, p, q, ages, stores, next_age, prev_store):
    arrival = u[:, 0] < p
    success = u[:, 1] < q
    after = np.append(ages[1:], next_age)
    if np.any(stores.astype(bool) & ~arrival):
        raise InvariantError("stored in a slot without a fresh arrival")
    reset = after != ages + 1
    if np.any(reset & (after != 1) & (after != 2)):
        raise InvariantError("age dropped to a value other than 1 or 2")
    fresh = reset & (after == 1)
    if np.any(fresh & ~(arrival & success)):
        raise InvariantError("age reset to 1 without a fresh delivery")
    # a drop to 2 from age >= 2 can only be the packet buffered one slot earlier
    prior = np.append(prev_store, stores[:-1]).astype(bool)
    buffered = reset & (after == 2)
    if np.any(buffered & ~(prior & ~arrival & success)):
        raise InvariantError("buffered delivery without a packet stored in the previous slot")


def simulate(params: SystemParams, policy, config: SimConfig, check: bool = True) -> SimStats:
    """Run one seeded replication.

    ``policy`` is a threshold (int or ``NEVER``) or a :class:`TabularPolicy`;
    tabular policies reuse their last row for ages beyond ``v_max``.
    Per-slot cost is the current age plus ``c`` when the arrival is stored.
    """
    table = _policy_table(policy)
    rng = np.random.Generator(np.random.Philox(config.seed))
    age, buf, prev_store = 1, 0, 0
    hist = np.zeros(64, dtype=np.int64)
    age_sum = 0
    n_store = 0
    done = 0
    while done < config.horizon:
        n = min(CHUNK, config.horizon - done)
        u = rng.random((n, 2))
        ages = np.empty(n, dtype=np.int64)
        stores = np.empty(n, dtype=np.int8)
        age, buf = _run(u, params.p, params.q, table, age, buf, ages, stores)
        if check:
            _check_chunk(u, params.p, params.q, ages, stores, age, prev_store)
        prev_store = stores[-1]
        skip = max(0, config.burn_in - done)
        if skip < n:
            kept = ages[skip:]
            counts = np.bincount(kept)
            if counts.size > hist.size:
                hist = np.concatenate([hist, np.zeros(counts.size - hist.size, dtype=np.int64)])
            hist[: counts.size] += counts
            age_sum += int(kept.sum())
            n_store += int(stores[skip:].sum())
        done += n
    counted = config.horizon - config.burn_in
    return SimStats(
        avg_cost=(age_sum + params.c * n_store) / counted,
        avg_age=age_sum / counted,
        storage_rate=n_store / counted,
        age_histogram=np.trim_zeros(hist, "b"),
        slots_counted=counted,
        seed=config.seed,
    )


def empirical_age_distribution(stats: SimStats) -> np.ndarray:
    if stats.slots_counted <= 0:
        raise ValueError("no slots counted")
    return stats.age_histogram / stats.age_histogram.sum()


def merge(runs: list[SimStats], c: float) -> SimStats:
    """Pool replications, weighting by slots counted."""
    total = sum(r.slots_counted for r in runs)
    width = max(r.age_histogram.size for r in runs)
    hist = np.zeros(width, dtype=np.int64)
    for r in runs:
        hist[: r.age_histogram.size] += r.age_histogram
    avg_age = sum(r.avg_age * r.slots_counted for r in runs) / total
    rate = sum(r.storage_rate * r.slots_counted for r in runs) / total
    return SimStats(avg_age + c * rate, avg_age, rate, hist, total, None)


def standard_error(runs: list[SimStats], field: str = "avg_cost") -> float:
    """Between-replication standard error of the pooled mean (nan for a single run)."""
    x = np.array([getattr(r, field) for r in runs])
    if x.size < 2:
        return math.nan
    return float(x.std(ddof=1) / math.sqrt(x.size))


def total_variation(p1: np.ndarray, p2: np.ndarray) -> float:
    n = max(p1.size, p2.size)
    a = np.zeros(n)
    b = np.zeros(n)
    a[: p1.size] = p1
    b[: p2.size] = p2
    return 0.5 * float(np.abs(a - b).sum())
