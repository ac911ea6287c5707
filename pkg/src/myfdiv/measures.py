"""Finite metric spaces, discrete measures and exact divergence values."""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InputError
from .generators import GeneratorSpec

__all__ = [
    "FiniteMetricSpace",
    "DiscreteMeasure",
    "lebesgue_decompose",
    "exact_divergence",
    "load_measure",
    "measure_to_dict",
]


@dataclasses.dataclass(frozen=True)
class FiniteMetricSpace:
    """n points with a symmetric distance matrix obeying the metric axioms."""

    dist: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InputError("dist must be a square matrix")
        if not np.all(np.isfinite(d)):
            raise InputError("dist must be finite")
        if not np.allclose(d, d.T, atol=1e-12):
            raise InputError("dist must be symmetric")
        if np.any(np.abs(np.diag(d)) > 1e-12):
            raise InputError("dist must have zero diagonal")
        off = ~np.eye(d.shape[0], dtype=bool)
        if np.any(d[off] <= 0.0):
            raise InputError("off-diagonal distances must be positive")
        # d_ij <= d_ik + d_kj for every triple
        if np.any(d[:, None, :] > d[:, :, None] + d[None, :, :] + 1e-12):
            raise InputError("dist violates the triangle inequality")
        object.__setattr__(self, "dist", d)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @classmethod
    def from_points(cls, points) -> "FiniteMetricSpace":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(cdist(pts, pts))

    @classmethod
    def from_shortest_path(cls, weights) -> "FiniteMetricSpace":
        """Metricize a symmetric nonnegative matrix by shortest paths."""
        w = np.asarray(weights, dtype=float)
        w = 0.5 * (w + w.T)
        np.fill_diagonal(w, 0.0)
        d = w.copy()
        for k in range(d.shape[0]):  # Floyd-Warshall
            d = np.minimum(d, d[:, k, None] + d[None, k, :])
        return cls(d)


@dataclasses.dataclass(frozen=True)
class DiscreteMeasure:
    """Nonnegative weights on the points of a finite space."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1:
            raise InputError("weights must be a 1-d vector")
        if np.any(w < -1e-12) or not np.all(np.isfinite(w)):
            raise InputError("weights must be finite and nonnegative")
        object.__setattr__(self, "weights", np.maximum(w, 0.0))

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def is_probability(self) -> bool:
        return abs(self.total_mass - 1.0) <= 1e-12

    def normalized(self) -> "DiscreteMeasure":
        total = self.total_mass
        if total <= 0:
            raise InputError("cannot normalize the zero measure")
        return DiscreteMeasure(self.weights / total)


def _weights(m) -> np.ndarray:
    if isinstance(m, DiscreteMeasure):
        return m.weights
    return DiscreteMeasure(np.asarray(m, dtype=float)).weights


def lebesgue_decompose(mu, nu) -> Tuple[DiscreteMeasure, DiscreteMeasure]:
    """Split mu into the part carried by supp(nu) and the singular rest."""
    w_mu, w_nu = _weights(mu), _weights(nu)
    if w_mu.shape != w_nu.shape:
        raise InputError("measures must live on the same point set")
    supp = w_nu > 0.0
    mu_c = np.where(supp, w_mu, 0.0)
    return DiscreteMeasure(mu_c), DiscreteMeasure(w_mu - mu_c)


def exact_divergence(spec: GeneratorSpec, mu, nu) -> float:
    """Exact f-divergence including the singular-part term.

    Returns +inf when singular mass meets an infinite slope at infinity.
    The trivial generator is the indicator of mu == nu.
    """
    w_mu, w_nu = _weights(mu), _weights(nu)
    if w_mu.shape != w_nu.shape:
        raise InputError("measures must live on the same point set")
    if spec.is_trivial:
        return 0.0 if np.allclose(w_mu, w_nu, atol=1e-12) else math.inf
    supp = w_nu > 0.0
    ratio = w_mu[supp] / w_nu[supp]
    terms = np.asarray(spec.phi_plus(ratio)) * w_nu[supp]
    total = float(terms.sum())
    singular_mass = float(w_mu[~supp].sum())
    if singular_mass > 0.0:
        if not math.isfinite(spec.phi_prime_inf):
            return math.inf
        total += spec.phi_prime_inf * singular_mass
    return total


# ---------------------------------------------------------------------------
# JSON measure files
# ---------------------------------------------------------------------------

def load_measure(path) -> Tuple[FiniteMetricSpace, DiscreteMeasure]:
    """Read a measure file: weights plus either points or a distance matrix."""
    with open(path) as fh:
        data = json.load(fh)
    return measure_from_dict(data)


def measure_from_dict(data) -> Tuple[FiniteMetricSpace, DiscreteMeasure]:
    points = data.get("points")
    dist = data.get("dist")
    if (points is None) == (dist is None):
        raise InputError("exactly one of 'points' or 'dist' must be present")
    if "weights" not in data:
        raise InputError("measure file is missing 'weights'")
    weights = DiscreteMeasure(np.asarray(data["weights"], dtype=float))
    if points is not None:
        space = FiniteMetricSpace.from_points(points)
    else:
        space = FiniteMetricSpace(np.asarray(dist, dtype=float))
    if weights.n != space.n:
        raise InputError("weights length does not match the number of points")
    return space, weights


def measure_to_dict(
    measure: DiscreteMeasure,
    space: Optional[FiniteMetricSpace] = None,
    points=None,
) -> dict:
    out = {
        "points": None if points is None else np.asarray(points).tolist(),
        "dist": None if space is None or points is not None else space.dist.tolist(),
        "weights": measure.weights.tolist(),
    }
    return out
