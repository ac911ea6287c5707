"""Tight convex conjugate of f-divergences on finite support.

The conjugate of ``D_phi(.||nu)`` restricted to probability measures is

    value(f) = <nu, phi_plus_conj(f - gamma)> + gamma,

where ``gamma`` solves the scalar first-order condition
``<nu, phi_plus_conj_d1(f - gamma)> = 1`` over the feasible half-line
``gamma >= max(f) - phi_prime_inf``.  The solver is a safeguarded Newton
iteration with a bisection fallback on the monotone residual; gradients come
from the implicit function theorem rather than differentiating through the
iterations.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Optional

import numpy as np
from scipy import optimize

from .errors import InputError, SolverError
from .generators import GeneratorSpec

__all__ = [
    "SolverConfig",
    "GammaSolution",
    "solve_gamma",
    "conjugate_value",
    "conjugate_gradient",
    "conjugate_value_and_gradient",
    "check_csiszar_potential",
    "CsiszarReport",
]


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    """Newton solver knobs.

    ``epsilon`` offsets the initial gamma from the feasibility boundary when
    the generator has a finite slope at infinity; ``None`` picks
    ``1e-3 * (1 + |max f - <nu, f>|)``.
    """

    tol: float = 1e-12
    max_iter: int = 100
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.tol <= 0:
            raise InputError("tol must be positive")
        if self.epsilon is not None and self.epsilon <= 0:
            raise InputError("epsilon must be positive")


DEFAULT_CONFIG = SolverConfig()


@dataclasses.dataclass
class GammaSolution:
    gamma: float
    grad: np.ndarray
    iterations: int
    converged: bool
    residual: float
    method: str = "newton"

    def to_dict(self):
        return {
            "gamma": self.gamma,
            "grad": self.grad.tolist(),
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
            "method": self.method,
        }


def _validate_inputs(f, nu):
    f = np.asarray(f, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if f.ndim != 1 or nu.ndim != 1 or f.shape != nu.shape:
        raise InputError("f and nu must be 1-d arrays of the same length")
    if not np.all(np.isfinite(f)):
        raise InputError("f must be finite")
    if np.any(nu < -1e-12) or abs(float(nu.sum()) - 1.0) > 1e-9:
        raise InputError("nu must be a probability vector")
    nu = np.maximum(nu, 0.0)
    return f, nu


def solve_gamma(
    spec: GeneratorSpec,
    f,
    nu,
    cfg: SolverConfig = DEFAULT_CONFIG,
    method: str = "auto",
    gamma0: Optional[float] = None,
) -> GammaSolution:
    """Find the optimal shift gamma and its gradient in f.

    ``method`` is one of ``"auto"`` (closed form when the generator has one),
    ``"newton"`` (force the iterative path) or ``"closed_form"``.
    ``gamma0`` warm-starts the Newton iteration.
    """
    f, nu = _validate_inputs(f, nu)
    if method not in ("auto", "newton", "closed_form"):
        raise InputError(f"unknown method {method!r}")
    if spec.is_trivial:
        raise InputError("the trivial generator has no gamma problem")
    if method == "closed_form" or (method == "auto" and spec.closed_form_gamma):
        if spec.closed_form_gamma is None:
            raise InputError(f"{spec.name} has no closed-form gamma")
        return _closed_form_solution(spec, f, nu)
    if not spec.newton_applicable:
        raise InputError(f"{spec.name} is not Newton-applicable")
    return _newton_solution(spec, f, nu, cfg, gamma0)


def _closed_form_solution(spec, f, nu):
    supp = nu > 0.0
    gamma = float(spec.closed_form_gamma(f[supp], nu[supp]))
    gamma = max(gamma, float(np.max(f)) - spec.phi_prime_inf)
    d2 = np.asarray(spec.phi_plus_conj_d2(f[supp] - gamma))
    denom = float(nu[supp] @ d2)
    grad = np.zeros_like(f)
    if denom > 0.0 and np.all(np.isfinite(d2)):
        grad[supp] = nu[supp] * d2 / denom
    else:
        # total variation: gamma = max(f) - 1 depends on f only through the
        # maximum, so the gradient is the indicator of the (first) argmax.
        grad[int(np.argmax(f))] = 1.0
    residual = float(nu[supp] @ np.asarray(spec.phi_plus_conj_d1(f[supp] - gamma)) - 1.0)
    return GammaSolution(gamma, grad, 0, True, abs(residual), method="closed-form")


def _newton_solution(spec, f, nu, cfg, gamma0):
    supp = nu > 0.0
    fs, ns = f[supp], nu[supp]
    pinf = spec.phi_prime_inf
    gmin = float(np.max(f)) - pinf  # -inf when the slope at infinity is inf
    d1, d2 = spec.phi_plus_conj_d1, spec.phi_plus_conj_d2

    def resid(g):
        with np.errstate(over="ignore"):
            vals = np.asarray(d1(fs - g))
        if np.any(~np.isfinite(vals)):
            return math.inf  # derivatives are nonnegative; any blow-up dominates
        return float(ns @ vals) - 1.0

    if gamma0 is not None and math.isfinite(gamma0) and gamma0 > gmin:
        gamma = float(gamma0)
    elif math.isfinite(pinf):
        eps = cfg.epsilon
        if eps is None:
            eps = 1e-3 * (1.0 + abs(float(np.max(f)) - float(ns @ fs)))
        gamma = float(np.max(f)) - pinf + eps
    else:
        gamma = float(ns @ fs)

    r = resid(gamma)
    iterations = 0
    fell_back = False
    for iterations in range(1, cfg.max_iter + 1):
        if r == 0.0:
            break
        curv = float(ns @ np.asarray(d2(fs - gamma)))
        if not math.isfinite(r) or not math.isfinite(curv) or curv <= 0.0:
            fell_back = True
            break
        step = -r / curv  # Newton step on the first-order condition
        new_gamma = gamma - step
        if new_gamma <= gmin:
            fell_back = True
            break
        new_r = resid(new_gamma)
        if abs(new_r) > abs(r) and abs(step) > cfg.tol:
            fell_back = True
            break
        gamma, r = new_gamma, new_r
        if abs(step) < cfg.tol:
            break
    else:
        fell_back = True

    if fell_back or abs(r) > 1e-9:
        gamma, r = _bisection_fallback(resid, gamma, gmin, f, ns, fs)

    # near a steep domain boundary the residual cannot be resolved below
    # curvature times the float spacing of gamma, so scale the acceptance
    with np.errstate(over="ignore"):
        curv = float(ns @ np.asarray(d2(fs - gamma)))
    r_tol = 1e-9
    if math.isfinite(curv) and curv > 0.0:
        r_tol = max(r_tol, curv * (1.0 + abs(gamma)) * 4e-15)
    elif not math.isfinite(curv):
        r_tol = math.inf
    if not math.isfinite(gamma) or abs(r) > r_tol:
        raise SolverError(
            f"gamma solver failed for {spec.name}",
            {
                "generator": spec.name,
                "gamma": gamma,
                "residual": r,
                "iterations": iterations,
            },
        )

    d2v = np.asarray(d2(fs - gamma))
    denom = float(ns @ d2v)
    grad = np.zeros_like(f)
    if denom > 0.0 and np.all(np.isfinite(d2v)):
        grad[supp] = ns * d2v / denom
    else:  # flat second derivative at the solution; distribute by first order
        d1v = np.asarray(d1(fs - gamma))
        grad[supp] = ns * d1v / max(float(ns @ d1v), 1e-300)
    return GammaSolution(float(gamma), grad, iterations, True, abs(r), method="newton")


def _bisection_fallback(resid, gamma, gmin, f, ns, fs):
    """Bracket the monotone residual and solve by Brent's method."""
    scale = 1.0 + float(np.max(fs) - np.min(fs)) if fs.size else 1.0
    # residual is nonincreasing in gamma: positive for small gamma, negative
    # for large gamma.
    hi = gamma if math.isfinite(gamma) else float(np.max(f))
    step = scale
    for _ in range(200):
        if resid(hi) < 0.0:
            break
        hi += step
        step *= 2.0
    else:
        raise SolverError("could not bracket gamma from above", {"gamma": gamma})
    lo = min(gamma, hi - scale) if math.isfinite(gamma) else hi - scale
    if math.isfinite(gmin):
        lo = max(lo, gmin + 1e-300)
    step = scale
    for _ in range(200):
        r_lo = resid(lo)
        if r_lo > 0.0:
            break
        if math.isfinite(gmin):
            lo = gmin + 0.5 * (lo - gmin)
        else:
            lo -= step
            step *= 2.0
    else:
        raise SolverError("could not bracket gamma from below", {"gamma": gamma})
    if not math.isfinite(r_lo):
        # nudge off the boundary until the residual is finite but positive
        for _ in range(200):
            mid = lo + 0.25 * (hi - lo)
            r_mid = resid(mid)
            if math.isfinite(r_mid):
                if r_mid > 0.0:
                    lo = mid
                    break
                hi = mid
            else:
                lo = mid
    root = optimize.brentq(resid, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=200)
    return float(root), resid(float(root))


# ---------------------------------------------------------------------------
# conjugate evaluation
# ---------------------------------------------------------------------------

def conjugate_value(
    spec: GeneratorSpec,
    f,
    nu,
    cfg: SolverConfig = DEFAULT_CONFIG,
    method: str = "auto",
    stabilize: bool = True,
) -> float:
    """Evaluate the tight conjugate at the potential f.

    Always shifts by max(f) before solving (the generalized log-sum-exp
    trick) unless ``stabilize`` is False.
    """
    value, _, _ = conjugate_value_and_gradient(
        spec, f, nu, cfg, method=method, stabilize=stabilize
    )
    return value


def conjugate_gradient(
    spec: GeneratorSpec,
    f,
    nu,
    cfg: SolverConfig = DEFAULT_CONFIG,
    method: str = "auto",
) -> np.ndarray:
    """Gradient of the conjugate in f: the optimizing probability vector."""
    _, grad, _ = conjugate_value_and_gradient(spec, f, nu, cfg, method=method)
    return grad


def conjugate_value_and_gradient(
    spec: GeneratorSpec,
    f,
    nu,
    cfg: SolverConfig = DEFAULT_CONFIG,
    method: str = "auto",
    stabilize: bool = True,
    gamma0: Optional[float] = None,
):
    """Evaluate the conjugate and its gradient from a single gamma solve.

    Returns ``(value, grad, gamma_solution)``; for the trivial generator the
    value is ``<nu, f>``, the gradient is ``nu`` and the solution is None.
    """
    f, nu = _validate_inputs(f, nu)
    if spec.is_trivial:
        return float(nu @ f), nu.copy(), None
    shift = float(np.max(f)) if stabilize else 0.0
    fsh = f - shift
    sol = solve_gamma(
        spec,
        fsh,
        nu,
        cfg,
        method=method,
        gamma0=None if gamma0 is None else gamma0 - shift,
    )
    supp = nu > 0.0
    z = fsh[supp] - sol.gamma
    with np.errstate(over="ignore"):
        conj = np.asarray(spec.phi_plus_conj(z))
    value = float(nu[supp] @ conj) + sol.gamma + shift
    if spec.name == "total_variation":
        grad = _tv_subgradient(f, nu, sol.gamma + shift)
    else:
        d1v = np.asarray(spec.phi_plus_conj_d1(z))
        grad = np.zeros_like(f)
        grad[supp] = nu[supp] * d1v
    return value, grad, sol


def _tv_subgradient(f, nu, gamma):
    """A probability vector in the conjugate subdifferential for |x-1|."""
    z = f - gamma
    grad = np.where((z >= -1.0) & (nu > 0.0), nu, 0.0)
    deficit = 1.0 - float(grad.sum())
    if deficit > 0.0:
        grad[int(np.argmax(f))] += deficit
    return grad


# ---------------------------------------------------------------------------
# optimal-potential conditions
# ---------------------------------------------------------------------------

@dataclasses.dataclass
class CsiszarReport:
    C: float
    max_violation: float
    ok: bool

    def to_dict(self):
        return dataclasses.asdict(self)


def check_csiszar_potential(
    spec: GeneratorSpec, mu, nu, f, tol: float = 1e-8
) -> CsiszarReport:
    """Test whether f (up to a constant) attains the variational supremum.

    Searches the additive constant C minimizing the worst violation of the
    optimality conditions: the shifted potential stays below the slope at
    infinity, its conjugate derivative reproduces the likelihood ratio on the
    support of nu, and singular mass sits where the shifted potential equals
    the slope at infinity.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    f = np.asarray(f, dtype=float)
    if not (mu.shape == nu.shape == f.shape):
        raise InputError("mu, nu, f must share a point set")
    pinf = spec.phi_prime_inf
    supp = nu > 0.0
    singular = (mu > 0.0) & ~supp
    ratio = np.zeros_like(mu)
    ratio[supp] = mu[supp] / nu[supp]

    big = 1e6

    def violation(C):
        v = 0.0
        if math.isfinite(pinf):
            v = max(v, float(np.max(f)) + C - pinf)
            v = max(v, 0.0)
        shifted = f[supp] + C
        with np.errstate(over="ignore"):
            d1v = np.asarray(spec.phi_plus_conj_d1(shifted))
        if not np.all(np.isfinite(d1v)):
            overshoot = float(np.max(shifted)) - pinf
            return big + max(overshoot, 0.0)
        v = max(v, float(np.max(np.abs(d1v - ratio[supp]))) if supp.any() else 0.0)
        if singular.any():
            if not math.isfinite(pinf):
                return np.inf
            v = max(v, float(np.max(np.abs(f[singular] + C - pinf))))
        return v

    # candidate constants from the Legendre inverse on the support
    candidates = []
    if spec.is_legendre and supp.any():
        pos = supp & (mu > 0.0)
        if pos.any():
            with np.errstate(divide="ignore", invalid="ignore"):
                cand = np.asarray(spec.potential_from_ratio(mu[pos] / nu[pos])) - f[pos]
            cand = cand[np.isfinite(cand)]
            candidates.extend(cand.tolist())
    if singular.any() and math.isfinite(pinf):
        candidates.extend((pinf - f[singular]).tolist())
    if not candidates:
        candidates = list(np.linspace(-20.0, 20.0, 81))
    lo = min(candidates) - 1.0
    hi = max(candidates) + 1.0
    if math.isfinite(pinf):
        hi = min(hi, pinf - float(np.max(f)))
        lo = min(lo, hi - 1e-12)
    # the worst violation is quasiconvex in C, so bounded scalar minimization
    # finds its global minimizer
    res = optimize.minimize_scalar(
        violation, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14}
    )
    best_c, best_v = float(res.x), float(res.fun)
    for c in candidates:
        v = violation(c)
        if v < best_v:
            best_c, best_v = float(c), float(v)
    return CsiszarReport(C=best_c, max_violation=best_v, ok=bool(best_v <= tol))
