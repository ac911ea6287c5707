"""Catalog of divergence generators.

Each generator is described by a :class:`GeneratorSpec` bundling the convex
function ``phi_plus`` (restricted to nonnegative arguments), its convex
conjugate ``phi_plus_conj`` with first and second derivatives, the recession
slope ``phi_prime_inf``, and optional closed forms.  All callables are
vectorized over numpy arrays and propagate ``+inf`` outside their effective
domains instead of raising.

Piecewise boundaries are evaluated on the closed branch as printed in the
derivations; derivatives at a kink take the right-continuous branch.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Optional

import numpy as np

from .errors import InputError

__all__ = [
    "GeneratorSpec",
    "GENERATOR_NAMES",
    "LEGENDRE_NAMES",
    "get_spec",
    "lambert_w",
    "lambert_w_grad",
]

LOG2 = math.log(2.0)
_INV_E = math.exp(-1.0)


# ---------------------------------------------------------------------------
# Lambert W
# ---------------------------------------------------------------------------

def _halley_lambert(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Halley iterations for w*exp(w) = x, elementwise on finite entries."""
    tol = 1e-14 * (1.0 + np.abs(x))
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(64):
            ew = np.exp(w)
            r = w * ew - x
            if np.all(np.abs(r) <= tol):
                break
            # Halley step; the denominator correction keeps the iteration
            # stable near the branch point w = -1 where the plain Newton
            # slope vanishes.
            wp1 = w + 1.0
            denom = ew * wp1 - (w + 2.0) * r / (2.0 * wp1)
            step = np.where(denom != 0.0, r / np.where(denom != 0.0, denom, 1.0), 0.0)
            step = np.where(np.isfinite(step), step, 0.0)
            w = w - step
            w = np.maximum(w, -1.0)
    return w


def lambert_w(x):
    """Principal branch of the Lambert W function (w >= -1 with w*e^w = x).

    Accepts scalars or arrays with entries >= -1/e.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < -_INV_E - 4e-16):
        raise InputError("lambert_w requires x >= -1/e")
    clipped = np.maximum(arr, -_INV_E)
    inf_mask = np.isinf(clipped)
    finite = np.where(inf_mask, 0.0, clipped)
    w0 = np.where(finite >= 0.0, np.log1p(finite), finite * np.e)
    w = _halley_lambert(finite, w0)
    w = np.where(inf_mask, np.inf, w)
    return float(w) if arr.ndim == 0 else w


def lambert_w_grad(x):
    """Derivative of the principal Lambert W branch; equals 1 at x = 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= -_INV_E - 4e-16):
        raise InputError("lambert_w_grad requires x > -1/e")
    w = np.asarray(lambert_w(arr))
    with np.errstate(divide="ignore", invalid="ignore"):
        g = w / (arr * (1.0 + w))
    g = np.where(arr == 0.0, 1.0, g)
    return float(g) if arr.ndim == 0 else g


def _lambert_w_of_exp(t):
    """W(e^t), stable for large t where e^t or w*e^w overflows.

    For t > 40 solves w + log(w) = t by Newton instead of exponentiating.
    """
    scalar = np.asarray(t).ndim == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    small = t <= 40.0
    if np.any(small):
        out[small] = np.asarray(lambert_w(np.exp(t[small])))
    big = ~small
    if np.any(big):
        tb = t[big]
        w = tb - np.log(tb)
        for _ in range(8):
            w = w - (w + np.log(w) - tb) * w / (w + 1.0)
        out[big] = w
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# GeneratorSpec
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class GeneratorSpec:
    """Immutable description of one f-divergence generator.

    ``phi_plus`` maps the likelihood ratio; ``phi_plus_conj`` and its two
    derivatives drive the Newton solver for the tight conjugate.
    ``phi_prime_inf`` is the slope at infinity (also the supremum of the
    conjugate's effective domain).  ``potential_from_ratio`` is the
    derivative of ``phi_plus``, the map sending a likelihood ratio to the
    value of an optimal potential (defined for Legendre-type generators).
    """

    name: str
    phi_plus: Callable
    phi_plus_conj: Callable
    phi_plus_conj_d1: Callable
    phi_plus_conj_d2: Callable
    phi_prime_inf: float
    newton_applicable: bool
    closed_form_gamma: Optional[Callable] = None
    closed_form_divergence: Optional[Callable] = None
    potential_from_ratio: Optional[Callable] = None

    @property
    def is_trivial(self) -> bool:
        return self.name == "trivial"

    @property
    def is_legendre(self) -> bool:
        return self.potential_from_ratio is not None

    def __repr__(self):  # keep solver diagnostics short
        return f"GeneratorSpec({self.name!r})"


def _as_array(x):
    return np.asarray(x, dtype=float)


def _ret(x_in, out):
    return float(out) if np.asarray(x_in).ndim == 0 else out


# --- Kullback-Leibler -------------------------------------------------------

def _kl_phi(x):
    u = _as_array(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = u * np.log(u) - u + 1.0
    v = np.where(u == 0.0, 1.0, v)
    v = np.where(u < 0.0, np.inf, v)
    return _ret(x, v)


def _kl_conj(x):
    return _ret(x, np.expm1(_as_array(x)))


def _kl_gamma(f, nu):
    f = _as_array(f)
    nu = _as_array(nu)
    m = float(np.max(f))
    return m + math.log(float(nu @ np.exp(f - m)))


# --- reverse Kullback-Leibler ------------------------------------------------

def _rkl_phi(x):
    u = _as_array(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = u - 1.0 - np.log(u)
    v = np.where(u <= 0.0, np.inf, v)
    return _ret(x, v)


def _rkl_conj(x):
    z = _as_array(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = -np.log1p(-z)
    v = np.where(z > 1.0, np.inf, v)
    return _ret(x, v)


def _rkl_conj_d1(x):
    z = _as_array(x)
    with np.errstate(divide="ignore"):
        v = 1.0 / (1.0 - z)
    v = np.where(z >= 1.0, np.inf, v)
    return _ret(x, v)


def _rkl_conj_d2(x):
    z = _as_array(x)
    with np.errstate(divide="ignore"):
        v = 1.0 / (1.0 - z) ** 2
    v = np.where(z >= 1.0, np.inf, v)
    return _ret(x, v)


# --- chi^2 -------------------------------------------------------------------

def _chi2_phi(x):
    u = _as_array(x)
    v = (u - 1.0) ** 2
    v = np.where(u < 0.0, np.inf, v)
    return _ret(x, v)


def _chi2_conj(x):
    z = _as_array(x)
    v = np.where(z >= -2.0, 0.25 * z * z + z, -1.0)
    return _ret(x, v)


def _chi2_conj_d1(x):
    z = _as_array(x)
    v = np.where(z >= -2.0, 0.5 * z + 1.0, 0.0)
    return _ret(x, v)


def _chi2_conj_d2(x):
    z = _as_array(x)
    v = np.where(z >= -2.0, 0.5, 0.0)
    return _ret(x, v)


# --- reverse chi^2 -----------------------------------------------------------

def _rchi2_phi(x):
    u = _as_array(x)
    with np.errstate(divide="ignore"):
        v = 1.0 / u + u - 2.0
    v = np.where(u <= 0.0, np.inf, v)
    return _ret(x, v)


def _rchi2_conj(x):
    z = _as_array(x)
    with np.errstate(invalid="ignore"):
        v = 2.0 - 2.0 * np.sqrt(np.maximum(1.0 - z, 0.0))
    v = np.where(z > 1.0, np.inf, v)
    return _ret(x, v)


def _rchi2_conj_d1(x):
    z = _as_array(x)
    with np.errstate(divide="ignore"):
        v = 1.0 / np.sqrt(np.maximum(1.0 - z, 0.0))
    v = np.where(z > 1.0, np.inf, v)
    return _ret(x, v)


def _rchi2_conj_d2(x):
    z = _as_array(x)
    with np.errstate(divide="ignore"):
        v = 0.5 / np.sqrt(np.maximum(1.0 - z, 0.0)) ** 3
    v = np.where(z > 1.0, np.inf, v)
    return _ret(x, v)


# --- squared Hellinger -------------------------------------------------------

def _hell_phi(x):
    u = _as_array(x)
    with np.errstate(invalid="ignore"):
        v = (np.sqrt(np.maximum(u, 0.0)) - 1.0) ** 2
    v = np.where(u < 0.0, np.inf, v)
    return _ret(x, v)


def _hell_conj(x):
    z = _as_array(x)
    with np.errstate(divide="ignore"):
        v = z / (1.0 - z)
    v = np.where(z >= 1.0, np.inf, v)
    return _ret(x, v)


def _hell_conj_d1(x):
    z = _as_array(x)
    with np.errstate(divide="ignore"):
        v = 1.0 / (1.0 - z) ** 2
    v = np.where(z >= 1.0, np.inf, v)
    return _ret(x, v)


def _hell_conj_d2(x):
    z = _as_array(x)
    with np.errstate(divide="ignore"):
        v = 2.0 / (1.0 - z) ** 3
    v = np.where(z >= 1.0, np.inf, v)
    return _ret(x, v)


# --- Jensen-Shannon ----------------------------------------------------------

def _js_phi(x):
    u = _as_array(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = u * np.log(u) - (u + 1.0) * np.log(0.5 * (u + 1.0))
    v = np.where(u == 0.0, LOG2, v)
    v = np.where(u < 0.0, np.inf, v)
    return _ret(x, v)


def _js_conj(x):
    z = _as_array(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = -np.log(2.0 - np.exp(z))
    v = np.where(z >= LOG2, np.inf, v)
    return _ret(x, v)


def _js_conj_d1(x):
    z = _as_array(x)
    with np.errstate(divide="ignore", over="ignore"):
        v = 1.0 / (2.0 * np.exp(-z) - 1.0)
    v = np.where(z >= LOG2, np.inf, v)
    return _ret(x, v)


def _js_conj_d2(x):
    z = _as_array(x)
    with np.errstate(divide="ignore", over="ignore"):
        ez = np.exp(z)
        v = 2.0 * ez / (ez - 2.0) ** 2
    v = np.where(z >= LOG2, np.inf, v)
    return _ret(x, v)


# --- Jeffreys ----------------------------------------------------------------

def _jef_phi(x):
    u = _as_array(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (u - 1.0) * np.log(u)
    v = np.where(u <= 0.0, np.inf, v)
    v = np.where(u == 1.0, 0.0, v)
    return _ret(x, v)


def _jef_conj(x):
    z = _as_array(x)
    w = _lambert_w_of_exp(1.0 - z)
    with np.errstate(divide="ignore"):  # W underflows to 0 for z -> +inf
        v = z + w + 1.0 / w - 2.0
    return _ret(x, v)


def _jef_conj_d1(x):
    z = _as_array(x)
    with np.errstate(divide="ignore"):
        v = 1.0 / _lambert_w_of_exp(1.0 - z)
    return _ret(x, v)


def _jef_conj_d2(x):
    z = _as_array(x)
    w = _lambert_w_of_exp(1.0 - z)
    with np.errstate(divide="ignore"):
        v = 1.0 / (w * (w + 1.0))
    return _ret(x, v)


# --- triangular discrimination ------------------------------------------------

def _tri_phi(x):
    u = _as_array(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (u - 1.0) ** 2 / (u + 1.0)
    v = np.where(u < 0.0, np.inf, v)
    return _ret(x, v)


def _tri_conj(x):
    z = _as_array(x)
    with np.errstate(invalid="ignore"):
        s = np.sqrt(np.maximum(1.0 - z, 0.0))
        mid = (s - 1.0) * (s - 3.0)
    v = np.where(z < -3.0, -1.0, mid)
    v = np.where(z > 1.0, np.inf, v)
    return _ret(x, v)


def _tri_conj_d1(x):
    z = _as_array(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        mid = 2.0 / np.sqrt(np.maximum(1.0 - z, 0.0)) - 1.0
    v = np.where(z < -3.0, 0.0, mid)
    v = np.where(z > 1.0, np.inf, v)
    return _ret(x, v)


def _tri_conj_d2(x):
    z = _as_array(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        mid = 1.0 / np.sqrt(np.maximum(1.0 - z, 0.0)) ** 3
    v = np.where(z < -3.0, 0.0, mid)
    v = np.where(z > 1.0, np.inf, v)
    return _ret(x, v)


# --- total variation ----------------------------------------------------------

def _tv_phi(x):
    u = _as_array(x)
    v = np.abs(u - 1.0)
    v = np.where(u < 0.0, np.inf, v)
    return _ret(x, v)


def _tv_conj(x):
    z = _as_array(x)
    v = np.where(z < -1.0, -1.0, z)
    v = np.where(z > 1.0, np.inf, v)
    return _ret(x, v)


def _tv_conj_d1(x):
    z = _as_array(x)
    v = np.where(z < -1.0, 0.0, 1.0)
    v = np.where(z > 1.0, np.inf, v)
    return _ret(x, v)


def _tv_conj_d2(x):
    z = _as_array(x)
    v = np.zeros_like(z)
    v = np.where(z > 1.0, np.inf, v)
    return _ret(x, v)


def _tv_gamma(f, nu):
    return float(np.max(np.asarray(f, dtype=float))) - 1.0


# --- trivial (divergence is the indicator of mu == nu) ------------------------

def _trivial_phi(x):
    u = _as_array(x)
    v = np.where(u == 1.0, 0.0, np.inf)
    return _ret(x, v)


def _trivial_conj(x):
    # Degenerate conjugate of the indicator of {1}: the identity map.  The
    # conjugate machinery short-circuits the trivial generator, so this is
    # only exercised by direct table queries.
    z = _as_array(x)
    return _ret(x, z.copy())


def _trivial_conj_d1(x):
    z = _as_array(x)
    return _ret(x, np.ones_like(z))


def _trivial_conj_d2(x):
    z = _as_array(x)
    return _ret(x, np.zeros_like(z))


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def _kl_closed_div(u):
    u = _as_array(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = u * np.log(u)
    return np.where(u == 0.0, 0.0, v)


_SPECS = {
    "kl": GeneratorSpec(
        name="kl",
        phi_plus=_kl_phi,
        phi_plus_conj=_kl_conj,
        phi_plus_conj_d1=lambda x: _ret(x, np.exp(_as_array(x))),
        phi_plus_conj_d2=lambda x: _ret(x, np.exp(_as_array(x))),
        phi_prime_inf=np.inf,
        newton_applicable=True,
        closed_form_gamma=_kl_gamma,
        closed_form_divergence=_kl_closed_div,
        potential_from_ratio=lambda u: _ret(u, np.log(_as_array(u))),
    ),
    "reverse_kl": GeneratorSpec(
        name="reverse_kl",
        phi_plus=_rkl_phi,
        phi_plus_conj=_rkl_conj,
        phi_plus_conj_d1=_rkl_conj_d1,
        phi_plus_conj_d2=_rkl_conj_d2,
        phi_prime_inf=1.0,
        newton_applicable=True,
        potential_from_ratio=lambda u: _ret(u, 1.0 - 1.0 / _as_array(u)),
    ),
    "chi2": GeneratorSpec(
        name="chi2",
        phi_plus=_chi2_phi,
        phi_plus_conj=_chi2_conj,
        phi_plus_conj_d1=_chi2_conj_d1,
        phi_plus_conj_d2=_chi2_conj_d2,
        phi_prime_inf=np.inf,
        newton_applicable=True,
        closed_form_divergence=lambda u: (_as_array(u) - 1.0) ** 2,
        potential_from_ratio=lambda u: _ret(u, 2.0 * _as_array(u) - 2.0),
    ),
    "reverse_chi2": GeneratorSpec(
        name="reverse_chi2",
        phi_plus=_rchi2_phi,
        phi_plus_conj=_rchi2_conj,
        phi_plus_conj_d1=_rchi2_conj_d1,
        phi_plus_conj_d2=_rchi2_conj_d2,
        phi_prime_inf=1.0,
        newton_applicable=True,
        potential_from_ratio=lambda u: _ret(u, 1.0 - 1.0 / _as_array(u) ** 2),
    ),
    "squared_hellinger": GeneratorSpec(
        name="squared_hellinger",
        phi_plus=_hell_phi,
        phi_plus_conj=_hell_conj,
        phi_plus_conj_d1=_hell_conj_d1,
        phi_plus_conj_d2=_hell_conj_d2,
        phi_prime_inf=1.0,
        newton_applicable=True,
        potential_from_ratio=lambda u: _ret(u, 1.0 - 1.0 / np.sqrt(_as_array(u))),
    ),
    "jensen_shannon": GeneratorSpec(
        name="jensen_shannon",
        phi_plus=_js_phi,
        phi_plus_conj=_js_conj,
        phi_plus_conj_d1=_js_conj_d1,
        phi_plus_conj_d2=_js_conj_d2,
        phi_prime_inf=LOG2,
        newton_applicable=True,
        potential_from_ratio=lambda u: _ret(
            u, np.log(_as_array(u)) - np.log1p(_as_array(u)) + LOG2
        ),
    ),
    "jeffreys": GeneratorSpec(
        name="jeffreys",
        phi_plus=_jef_phi,
        phi_plus_conj=_jef_conj,
        phi_plus_conj_d1=_jef_conj_d1,
        phi_plus_conj_d2=_jef_conj_d2,
        phi_prime_inf=np.inf,
        newton_applicable=True,
        potential_from_ratio=lambda u: _ret(
            u, np.log(_as_array(u)) - 1.0 / _as_array(u) + 1.0
        ),
    ),
    "triangular": GeneratorSpec(
        name="triangular",
        phi_plus=_tri_phi,
        phi_plus_conj=_tri_conj,
        phi_plus_conj_d1=_tri_conj_d1,
        phi_plus_conj_d2=_tri_conj_d2,
        phi_prime_inf=1.0,
        newton_applicable=True,
        potential_from_ratio=lambda u: _ret(
            u,
            (_as_array(u) - 1.0) * (_as_array(u) + 3.0) / (_as_array(u) + 1.0) ** 2,
        ),
    ),
    "total_variation": GeneratorSpec(
        name="total_variation",
        phi_plus=_tv_phi,
        phi_plus_conj=_tv_conj,
        phi_plus_conj_d1=_tv_conj_d1,
        phi_plus_conj_d2=_tv_conj_d2,
        phi_prime_inf=1.0,
        newton_applicable=False,
        closed_form_gamma=_tv_gamma,
        closed_form_divergence=lambda u: np.abs(_as_array(u) - 1.0),
    ),
    "trivial": GeneratorSpec(
        name="trivial",
        phi_plus=_trivial_phi,
        phi_plus_conj=_trivial_conj,
        phi_plus_conj_d1=_trivial_conj_d1,
        phi_plus_conj_d2=_trivial_conj_d2,
        phi_prime_inf=np.inf,
        newton_applicable=False,
    ),
}

GENERATOR_NAMES = tuple(_SPECS)
LEGENDRE_NAMES = tuple(n for n, s in _SPECS.items() if s.is_legendre)


def get_spec(name: str) -> GeneratorSpec:
    """Look up a generator by its stable string identifier."""
    try:
        return _SPECS[name]
    except KeyError:
        raise InputError(
            f"unknown generator {name!r}; valid names: {', '.join(GENERATOR_NAMES)}"
        ) from None
