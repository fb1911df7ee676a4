"""Optimal threshold search: bracketed candidate scan and an exhaustive oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .closed_form import NEVER, average_cost, cost_excess, excess_above_two, excess_terms
from .model import SystemParams


class DegenerateBracket(ArithmeticError):
    pass


@dataclass(frozen=True)
class Bracket:
    """Open interval holding every stationary point of the real-valued cost on ``(2, inf)``."""

    lo: float
    hi: float

    def integers(self) -> range:
        """Integers to evaluate: the interior plus one neighbour on each side.

        Outside ``(lo, hi)`` the cost is monotone, so the integer minimiser is
        either inside, at a neighbour of an endpoint, at 2, or at NEVER.
        """
        if not self.hi > 2.0:
            return range(0)
        return range(max(2, math.floor(self.lo)), math.ceil(self.hi) + 1)


@dataclass(frozen=True)
class OptimizeResult:
    v_star: int | float
    cost: float
    bracket: Bracket | None
    candidates_evaluated: int
    method: str  # "algorithm1" or "brute_force"


def candidate_bracket(params: SystemParams) -> Bracket:
    """Locate the stationary points of the threshold cost.

    Writing the cost as ``f(x) = f(NEVER) + A u (B x + C) / (1 - k u)`` with
    ``u = (1-pq)^(x-2)``, ``f'(x) = 0`` reduces to ``u = a0 + a1 x`` with
    ``a1 = ln(1-pq)/k < 0``.  Requiring ``0 < u < 1`` gives the bracket.
    """
    t = excess_terms(params)
    if abs(t.k * t.slope) < 1e-12:
        raise DegenerateBracket(f"k*slope = {t.k * t.slope:.3e}")
    a1 = t.log_rho / t.k
    a0 = 1.0 / t.k + t.log_rho * t.offset / (t.k * t.slope)
    return Bracket((1.0 - a0) / a1, -a0 / a1)


def _select(candidates, excesses) -> tuple[int | float, int]:
    """Smallest excess wins, ties toward the smaller threshold.

    NEVER is returned unless some finite threshold is representably better,
    i.e. has a strictly negative excess.
    """
    best, best_x = NEVER, 0.0
    for v, x in zip(candidates, excesses):
        if x < best_x:
            best, best_x = v, x
    return best, len(candidates) + 1


def find_optimal_threshold(params: SystemParams) -> OptimizeResult:
    try:
        br = candidate_bracket(params)
    except DegenerateBracket:
        return brute_force_threshold(params)
    cands = sorted({1, 2, *br.integers()})
    excess = [cost_excess(params, v) for v in cands]
    v_star, n = _select(cands, excess)
    return OptimizeResult(v_star, average_cost(params, v_star), br, n, "algorithm1")


def brute_force_threshold(params: SystemParams, v_search: int = 500) -> OptimizeResult:
    if v_search < 2:
        raise ValueError(f"v_search must be >= 2, got {v_search}")
    grid = np.arange(2, v_search + 1)
    excess = [cost_excess(params, 1), *excess_above_two(params, grid, excess_terms(params)).tolist()]
    cands = [1, *grid.tolist()]
    v_star, n = _select(cands, excess)
    return OptimizeResult(v_star, average_cost(params, v_star), None, n, "brute_force")
