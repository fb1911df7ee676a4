"""Uncorrected variants of the threshold-policy closed forms.

These reproduce the conventional expressions before the corrections made
in :mod:`aoi_storage.closed_form` (``h_1 = pq``, normalisation of ``h_2``,
the ``h_1`` term inside the cost constant, the never-store limit and the
stationarity bracket).  Nothing in the solvers depends on them; they exist
so that ``validate`` can print how far each one is from the oracles.
"""

from __future__ import annotations

import math

from .closed_form import NEVER, check_threshold, cost_constants
from .model import SystemParams


def h1_h2(params: SystemParams, v_bar: int) -> tuple[float, float]:
    k = cost_constants(params)
    kap = (1.0 - params.p) * (1.0 - params.q)
    u = (1.0 - params.pq) ** (v_bar - 2)
    h2 = 1.0 / (2.0 - u * k.d5)
    h1 = (1.0 - u) * h2 + u * h2 / (1.0 + kap)
    return h1, h2


def average_cost(params: SystemParams, v_bar) -> float:
    v_bar = check_threshold(v_bar)
    if v_bar == NEVER:
        return never_store_cost(params)
    k = cost_constants(params)
    u = (1.0 - params.pq) ** (v_bar - 2)
    _, h2 = h1_h2(params, v_bar)
    return k.d1 * h2 + k.d2 * h2 * u * v_bar + k.d3 * h2 * u


def cost_at_two(params: SystemParams) -> float:
    k = cost_constants(params)
    s = params.pq
    kap = (1.0 - params.p) * (1.0 - params.q)
    _, h2 = h1_h2(params, 2)
    return (k.d + (1.0 / (1.0 + kap)) * ((s + 2.0) / s)) * h2


def never_store_cost(params: SystemParams) -> float:
    s = params.pq
    return (1.0 + s + s * s) / (2.0 * s * s)


def bracket(params: SystemParams) -> tuple[float, float, list[int]]:
    """Open interval from the uncorrected stationarity condition and its integers."""
    k = cost_constants(params)
    inv_log = 1.0 / math.log1p(-params.pq)
    x3 = max(2.0, k.d4 / (k.d5 - 2.0) - inv_log + 1.0)
    x4 = max(2.0, -k.d4 / 2.0 - inv_log + 1.0)
    lo, hi = (x3, x4) if k.d4 / k.d5 > 0 else (x4, x3)
    ints = [v for v in range(math.floor(lo) + 1, math.ceil(hi)) if lo < v < hi]
    return lo, hi, ints
