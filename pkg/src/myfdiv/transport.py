"""Wasserstein-1 on finite metric spaces: primal LP, dual potentials, Lipschitz norms."""

from __future__ import annotations

import dataclasses
from typing import Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import InputError, SolverError
from .measures import DiscreteMeasure, FiniteMetricSpace

__all__ = ["TransportPlan", "w1_primal", "w1_distance", "lipschitz_norm", "kantorovich_dual"]

_LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclasses.dataclass
class TransportPlan:
    pi: np.ndarray
    cost: float


def _prob_weights(m, n):
    w = m.weights if isinstance(m, DiscreteMeasure) else np.asarray(m, dtype=float)
    if w.shape != (n,):
        raise InputError("measure does not match the space")
    if np.any(w < 0):
        raise InputError("weights must be nonnegative")
    return w


def w1_primal(space: FiniteMetricSpace, mu, nu) -> TransportPlan:
    """Optimal transport plan between probability measures, linear cost."""
    n = space.n
    a = _prob_weights(mu, n)
    b = _prob_weights(nu, n)
    if abs(a.sum() - b.sum()) > 1e-9:
        raise InputError("marginals must carry equal mass")
    d = space.dist
    # equality constraints: row sums = a, column sums = b (last row dropped)
    eye = sparse.identity(n, format="csr")
    ones = np.ones((1, n))
    rows = sparse.kron(eye, ones, format="csr")
    cols = sparse.kron(ones, eye, format="csr")
    a_eq = sparse.vstack([rows, cols[:-1]], format="csr")
    b_eq = np.concatenate([a, b[:-1]])
    res = linprog(
        d.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None),
        method="highs", options=_LP_OPTIONS,
    )
    if res.status != 0:
        raise SolverError("transport LP failed", {"status": res.status, "msg": res.message})
    pi = res.x.reshape(n, n)
    return TransportPlan(pi=pi, cost=float((pi * d).sum()))


def w1_distance(space: FiniteMetricSpace, mu, nu) -> float:
    return w1_primal(space, mu, nu).cost


def lipschitz_norm(space: FiniteMetricSpace, f) -> float:
    """Largest pairwise difference quotient of f over the space."""
    f = np.asarray(f, dtype=float)
    if f.shape != (space.n,):
        raise InputError("potential does not match the space")
    if space.n < 2:
        return 0.0
    diff = np.abs(f[:, None] - f[None, :])
    off = ~np.eye(space.n, dtype=bool)
    return float(np.max(diff[off] / space.dist[off]))


def kantorovich_dual(space: FiniteMetricSpace, mu, nu) -> Tuple[float, np.ndarray]:
    """Maximize <mu - nu, f> over 1-Lipschitz potentials with f[0] = 0.

    Solved as its own LP, independent of the primal plan.  For mu == nu the
    zero potential is returned as the tie-break.
    """
    n = space.n
    a = _prob_weights(mu, n)
    b = _prob_weights(nu, n)
    delta = a - b
    if np.max(np.abs(delta)) <= 1e-14:
        return 0.0, np.zeros(n)
    # constraints f_i - f_j <= d_ij for every ordered pair i != j
    ii, jj = np.where(~np.eye(n, dtype=bool))
    m = ii.size
    data = np.concatenate([np.ones(m), -np.ones(m)])
    rows = np.concatenate([np.arange(m), np.arange(m)])
    colsidx = np.concatenate([ii, jj])
    a_ub = sparse.csr_matrix((data, (rows, colsidx)), shape=(m, n))
    b_ub = space.dist[ii, jj]
    a_eq = sparse.csr_matrix((np.ones(1), (np.zeros(1), np.zeros(1))), shape=(1, n))
    res = linprog(
        -delta, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=np.zeros(1),
        bounds=(None, None), method="highs", options=_LP_OPTIONS,
    )
    if res.status != 0:
        raise SolverError("dual LP failed", {"status": res.status, "msg": res.message})
    f = np.asarray(res.x)
    f = f - f[0]
    return float(delta @ f), f
