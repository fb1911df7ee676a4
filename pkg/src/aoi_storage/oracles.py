"""Independent numerical oracles for the closed forms.

Nothing here uses the closed-form constants: the chain oracle builds the
full ``(v, lam, b)`` kernel from :func:`aoi_storage.model.transition` and
solves for its stationary vector; the series oracle sums the pmf directly.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .closed_form import NEVER, check_threshold, stationary_distribution
from .mdp import TabularPolicy
from .model import State, SystemParams, enumerate_states, transition


def _index(s: State) -> int:
    return ((s.v - 1) * 2 + s.lam) * 2 + s.b


def capped_kernel(params: SystemParams, policy: TabularPolicy) -> sp.csr_matrix:
    """Sparse transition matrix of the policy on the age-capped state space."""
    v_max = policy.v_max
    rows, cols, vals = [], [], []
    for s in enumerate_states(v_max):
        i = _index(s)
        for (v, lam, b), prob in transition(params, s, policy[s]):
            rows.append(i)
            cols.append(((min(v, v_max) - 1) * 2 + lam) * 2 + b)
            vals.append(prob)
    n = 4 * v_max
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def truncated_chain_age_pmf(params: SystemParams, policy, v_max: int = 2000) -> np.ndarray:
    """Stationary age marginal ``h_1 .. h_{v_max}`` of the capped chain."""
    if not isinstance(policy, TabularPolicy):
        policy = TabularPolicy.from_threshold(policy, v_max)
    P = capped_kernel(params, policy)
    n = P.shape[0]
    A = (P.T - sp.identity(n, format="csr")).tolil()
    A[0, :] = np.ones(n)
    rhs = np.zeros(n)
    rhs[0] = 1.0
    # the minimum-degree ordering on A^T + A avoids the fill-in that the dense
    # rows of fresh-delivery states cause under the default COLAMD ordering
    pi = spla.spsolve(A.tocsc(), rhs, permc_spec="MMD_AT_PLUS_A")
    return pi.reshape(v_max, 4).sum(axis=1)


def summed_average_cost(params: SystemParams, v_bar, eps: float = 1e-18) -> float:
    """``sum_v h_v (v + c p 1{v >= v_bar})`` by explicit summation of the pmf."""
    v_bar = check_threshold(v_bar)
    dist = stationary_distribution(params, v_bar)
    slowest = max(dist.rates)
    # beyond this many tail terms v * r**i is below eps
    n_tail = int(math.ceil(math.log(eps) / math.log(slowest))) + 200
    last = dist.anchor + n_tail
    ages = np.arange(1, last + 1)
    h = dist.pmf(ages)
    storing = ages >= v_bar if v_bar != NEVER else np.zeros(ages.size, dtype=bool)
    return float(np.sum(h * (ages + params.c * params.p * storing)))
