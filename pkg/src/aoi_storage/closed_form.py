"""Stationary age distribution and average cost of threshold storage policies.

A threshold policy stores a fresh packet iff the current age is at least
``v_bar``.  Under such a policy the age process has

* ``h_1 = pq`` (a fresh delivery resets the age to one regardless of history),
* a geometric head ``h_j = (1-pq)^(j-2) h_2`` for ``2 <= j <= v_bar``,
* a tail obeying ``h_{v+2} = (1-pq) h_{v+1} - (1-p)p(1-q)q h_v`` whose two
  characteristic roots lie in (0, 1).

``NEVER`` (``math.inf``) is the threshold that never stores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SystemParams

NEVER = math.inf

DISCRIMINANT_FLOOR = 1e-12


class NearDegenerateRoots(ArithmeticError):
    def __init__(self, discriminant: float):
        super().__init__(f"characteristic roots nearly coincide (discriminant={discriminant:.3e})")
        self.discriminant = discriminant


def check_threshold(v_bar) -> int | float:
    """Normalise a threshold to ``int`` or ``NEVER``; reject anything else."""
    if v_bar == NEVER:
        return NEVER
    if isinstance(v_bar, float) and v_bar.is_integer():
        v_bar = int(v_bar)
    if not isinstance(v_bar, (int, np.integer)) or isinstance(v_bar, bool) or v_bar < 1:
        raise ValueError(f"threshold must be an integer >= 1 or NEVER, got {v_bar!r}")
    return int(v_bar)


def format_threshold(v_bar) -> str:
    return "inf" if v_bar == NEVER else str(int(v_bar))


def parse_threshold(text: str) -> int | float:
    if text.strip().lower() in ("inf", "never"):
        return NEVER
    return check_threshold(int(text))


@dataclass(frozen=True)
class TailRoots:
    r1: float
    r2: float
    discriminant: float


def recurrence_roots(params: SystemParams) -> TailRoots:
    """Roots of ``x^2 - (1-pq) x + (1-p)p(1-q)q``, ordered ``r1 < r2``."""
    rho = 1.0 - params.pq
    prod = params.pq * (1.0 - params.p) * (1.0 - params.q)
    disc = rho * rho - 4.0 * prod
    if disc < DISCRIMINANT_FLOOR:
        raise NearDegenerateRoots(disc)
    r2 = 0.5 * (rho + math.sqrt(disc))
    # Vieta for the small root avoids cancellation
    return TailRoots(prod / r2, r2, disc)


@dataclass(frozen=True)
class CostConstants:
    d: float
    d1: float
    d2: float
    d3: float
    d4: float
    d5: float


def cost_constants(params: SystemParams) -> CostConstants:
    """Constants of the threshold-cost expression, in their conventional form.

    ``d`` is the tail sum ``sum_i h_{v+i} (i + cp) / h_v``.  ``d4``/``d5`` belong
    to the uncorrected stationarity condition and are only used for reporting;
    see :mod:`aoi_storage.uncorrected`.
    """
    p, q, c, s = params.p, params.q, params.c, params.pq
    kap = (1.0 - p) * (1.0 - q)
    r = recurrence_roots(params)
    r1, r2 = r.r1, r.r2
    d = (
        c / (q * (1.0 + kap))
        + (r2 - 1.0 + s) * r1 / ((r2 - r1) * (1.0 - r1) ** 2)
        + (1.0 - r1 - s) * r2 / ((r2 - r1) * (1.0 - r2) ** 2)
    )
    d1 = (s * s + s + 1.0) / (s * s)
    d2 = (1.0 / s) * (1.0 / (1.0 + kap) - 1.0)
    d3 = (d + d * kap) / (1.0 + kap) - (1.0 - s + s * s) / (s * s)
    d4 = (d1 * (2.0 - (s + 1.0) / (s * (1.0 + kap))) + 2.0 / (s * (1.0 + kap))) / d2 + 2.0
    d5 = 2.0 - (1.0 / (1.0 + kap)) * ((s + 1.0) / s)
    return CostConstants(d, d1, d2, d3, d4, d5)


def tail_mass(params: SystemParams, h_vbar: float) -> float:
    """``sum_{i>=0} h_{v_bar+i}`` given ``h_{v_bar}`` (valid for ``v_bar >= 2``)."""
    kap = (1.0 - params.p) * (1.0 - params.q)
    return h_vbar / (params.pq * (1.0 + kap))


def _head_decay(params: SystemParams, v_bar) -> float:
    """``(1-pq)^(v_bar-2)`` via logs; underflows cleanly to 0."""
    return math.exp((v_bar - 2) * math.log1p(-params.pq))


@dataclass(frozen=True)
class StationaryDist:
    """Age pmf under a threshold policy.

    Ages below ``anchor`` form the head (``h1`` then ``h2 * rho**(v-2)``);
    from ``anchor`` on, ``h_{anchor+i} = sum_k tail_coeffs[k] * rates[k]**i``.
    """

    v_bar: int | float
    h1: float
    h2: float
    rho: float
    anchor: int
    rates: tuple[float, ...]
    tail_coeffs: tuple[float, ...]

    @property
    def h_vbar(self) -> float:
        return self.pmf(self.v_bar) if self.v_bar != NEVER else 0.0

    def pmf(self, ages):
        v = np.asarray(ages, dtype=np.int64)
        i = np.maximum(v - self.anchor, 0).astype(float)
        tail = sum(ck * np.power(rk, i) for ck, rk in zip(self.tail_coeffs, self.rates))
        head = np.where(v == 1, self.h1, self.h2 * np.power(self.rho, np.maximum(v - 2, 0).astype(float)))
        out = np.where(v >= self.anchor, tail, head)
        out = np.where(v >= 1, out, 0.0)
        return float(out) if out.ndim == 0 else out

    def truncated_pmf(self, v_max: int) -> np.ndarray:
        """``h_1 .. h_{v_max}`` as an array (index 0 is age 1)."""
        return self.pmf(np.arange(1, v_max + 1))

    def head_mass(self) -> float:
        if self.anchor <= 1:
            return 0.0
        n_geo = self.anchor - 2  # ages 2 .. anchor-1
        geo = self.h2 * -math.expm1(n_geo * math.log(self.rho)) / (1.0 - self.rho) if n_geo > 0 else 0.0
        return self.h1 + geo

    def tail_mass(self) -> float:
        return sum(ck / (1.0 - rk) for ck, rk in zip(self.tail_coeffs, self.rates))

    def total_mass(self) -> float:
        return self.head_mass() + self.tail_mass()

    def storing_mass(self) -> float:
        """Stationary probability that the age is at or above the threshold."""
        if self.v_bar == NEVER:
            return 0.0
        if self.v_bar == 1:
            return self.total_mass()
        return self.tail_mass()


def _tail_from_two(h_a: float, h_next: float, roots: TailRoots) -> tuple[float, float]:
    r1, r2 = roots.r1, roots.r2
    return (r2 * h_a - h_next) / (r2 - r1), (h_next - r1 * h_a) / (r2 - r1)


def stationary_distribution(params: SystemParams, v_bar) -> StationaryDist:
    v_bar = check_threshold(v_bar)
    s = params.pq
    rho = 1.0 - s
    kap = (1.0 - params.p) * (1.0 - params.q)
    if v_bar == NEVER:
        return StationaryDist(NEVER, s, s * rho, rho, 1, (rho,), (s,))
    roots = recurrence_roots(params)
    if v_bar == 1:
        # every arrival is stored, so age 2 is fed by all buffered deliveries
        h2 = s * (rho + kap)
        h3 = rho * h2 - s * kap * s
        c1, c2 = _tail_from_two(h2, h3, roots)
        return StationaryDist(1, s, h2, rho, 2, (roots.r1, roots.r2), (c1, c2))
    u = _head_decay(params, v_bar)
    k = kap / (1.0 + kap)
    h2 = s * rho / (1.0 - k * u)
    h_v = u * h2
    c1, c2 = _tail_from_two(h_v, rho * h_v, roots)
    return StationaryDist(v_bar, s, h2, rho, v_bar, (roots.r1, roots.r2), (c1, c2))


def never_store_cost(params: SystemParams) -> float:
    """Average age without storage: the age renews w.p. pq each slot."""
    return 1.0 / params.pq


def _cost_store_always(params: SystemParams) -> float:
    s, p, q = params.pq, params.p, params.q
    kap = (1.0 - p) * (1.0 - q)
    rho = 1.0 - s
    return s + params.c * p + (rho * (1.0 + s) - s * s * kap) / (s * (1.0 + kap))


def average_cost(params: SystemParams, v_bar) -> float:
    """Long-run average of age plus storage charge under threshold ``v_bar``.

    A stored packet is paid for only in slots with an arrival, so the
    storage charge accrues at rate ``c * p`` per slot spent at or above the
    threshold.
    """
    v_bar = check_threshold(v_bar)
    if v_bar == NEVER:
        return never_store_cost(params)
    if v_bar == 1:
        return _cost_store_always(params)
    k_ = cost_constants(params)
    s = params.pq
    kap = (1.0 - params.p) * (1.0 - params.q)
    u = _head_decay(params, v_bar)
    h2 = s * (1.0 - s) / (1.0 - u * kap / (1.0 + kap))
    if v_bar == 2:
        return s + (k_.d + 2.0 / (s * (1.0 + kap))) * h2
    return s + (k_.d1 - 1.0) * h2 + k_.d2 * h2 * u * v_bar + (k_.d3 + 1.0) * h2 * u


@dataclass(frozen=True)
class ExcessTerms:
    """``f(x) - f(NEVER) = pq(1-pq) * u (slope*x + offset) / (1 - k u)``, ``u = (1-pq)^(x-2)``."""

    slope: float
    offset: float
    k: float
    log_rho: float
    scale: float


def excess_terms(params: SystemParams) -> ExcessTerms:
    k_ = cost_constants(params)
    s = params.pq
    kap = (1.0 - params.p) * (1.0 - params.q)
    k = kap / (1.0 + kap)
    offset = k_.d3 + 1.0 + k * (1.0 + s) / (s * s)
    return ExcessTerms(k_.d2, offset, k, math.log1p(-s), s * (1.0 - s))


def excess_above_two(params: SystemParams, v_bar, terms: ExcessTerms | None = None):
    """Vectorised cost excess over never storing, for real ``v_bar >= 2``.

    Free of the cancellation in ``average_cost - never_store_cost`` so it
    ranks thresholds correctly even where the difference is ~1e-30.
    """
    t = terms or excess_terms(params)
    x = np.asarray(v_bar, dtype=float)
    u = np.exp((x - 2.0) * t.log_rho)
    out = t.scale * u * (t.slope * x + t.offset) / (1.0 - t.k * u)
    return float(out) if out.ndim == 0 else out


def cost_excess(params: SystemParams, v_bar) -> float:
    v_bar = check_threshold(v_bar)
    if v_bar == NEVER:
        return 0.0
    if v_bar == 1:
        return _cost_store_always(params) - never_store_cost(params)
    return excess_above_two(params, v_bar)
