"""Moreau-Yosida approximation of f-divergences in the Wasserstein-1 metric.

Two independent computation paths:

* ``my_primal`` minimizes ``D(xi||nu) + lam * W1(mu, xi)**alpha`` over the
  simplex, solved as one joint conic program over the pair (xi, plan).
* ``my_dual`` maximizes ``<mu, f> - conjugate(f||nu) - penalty(||f||_L)``
  over potentials pinned to f[0] = 0, by subgradient ascent with an optional
  derivative-free polish.

``check_optimality_structure`` verifies that the two optimizers fit together:
the dual maximizer is simultaneously an optimal potential of (xi*, nu) and a
scaled Kantorovich potential of (mu, xi*).
"""

from __future__ import annotations

import dataclasses
import math
from typing import Optional

import cvxpy as cp
import numpy as np
from scipy import optimize

from .conjugate import (
    CsiszarReport,
    SolverConfig,
    check_csiszar_potential,
    conjugate_value_and_gradient,
)
from .errors import InputError, SolverError
from .generators import GeneratorSpec
from .measures import DiscreteMeasure, FiniteMetricSpace, exact_divergence
from .transport import kantorovich_dual, lipschitz_norm, w1_primal

__all__ = [
    "MYParams",
    "MYConfig",
    "MYResult",
    "StructureReport",
    "penalty",
    "pasch_hausdorff",
    "my_primal",
    "my_dual",
    "check_optimality_structure",
]


@dataclasses.dataclass(frozen=True)
class MYParams:
    """Index lam and order alpha; alpha = inf uses the ball radius beta.

    For finite alpha exactly one of ``lam`` or ``beta`` must be given; a
    given beta is converted through ``lam = beta**(-alpha) / alpha``.
    """

    alpha: float
    lam: Optional[float] = None
    beta: Optional[float] = None

    def __post_init__(self):
        if not (self.alpha > 0.0 or math.isinf(self.alpha)):
            raise InputError("alpha must be positive or inf")
        if math.isinf(self.alpha):
            if self.lam is not None:
                raise InputError("alpha = inf takes the ball radius beta, not lam")
            if self.beta is None or self.beta <= 0.0:
                raise InputError("alpha = inf requires beta > 0")
        else:
            if (self.lam is None) == (self.beta is None):
                raise InputError("give exactly one of lam or beta")
            if self.lam is not None and self.lam <= 0.0:
                raise InputError("lam must be positive")
            if self.beta is not None and self.beta <= 0.0:
                raise InputError("beta must be positive")

    @property
    def lam_effective(self) -> float:
        if math.isinf(self.alpha):
            raise InputError("no finite lam for alpha = inf")
        if self.lam is not None:
            return self.lam
        return self.beta ** (-self.alpha) / self.alpha


@dataclasses.dataclass(frozen=True)
class MYConfig:
    """Solver budgets; serializable from CLI JSON configs."""

    tol: float = 1e-9
    dual_lr: float = 0.05
    dual_iters: int = 20000
    primal_iters: int = 5000
    primal_step: Optional[float] = None
    polish: bool = True
    polish_maxiter: int = 4000
    seed: int = 0
    newton: SolverConfig = SolverConfig()


DEFAULT_MY_CONFIG = MYConfig()


@dataclasses.dataclass
class MYResult:
    value: float
    xi_star: Optional[DiscreteMeasure] = None
    f_star: Optional[np.ndarray] = None
    iterations: int = 0
    converged: bool = True
    gap: Optional[float] = None
    method: str = ""

    def to_dict(self):
        return {
            "value": self.value,
            "xi_star": None if self.xi_star is None else self.xi_star.weights.tolist(),
            "f_star": None if self.f_star is None else np.asarray(self.f_star).tolist(),
            "iterations": self.iterations,
            "converged": self.converged,
            "gap": self.gap,
            "method": self.method,
        }


# ---------------------------------------------------------------------------
# penalty
# ---------------------------------------------------------------------------

def penalty(lam: float, alpha: float, L: float) -> float:
    """Lipschitz penalty of the dual formula.

    ``alpha > 1`` gives the smooth power penalty; ``alpha = 1`` the indicator
    of ``L <= lam``; for ``alpha = inf`` the first argument is the ball
    radius and the penalty is ``radius * L``.
    """
    if L < 0.0:
        raise InputError("L must be nonnegative")
    if math.isinf(alpha):
        return lam * L
    if alpha == 1.0:
        return 0.0 if L <= lam * (1.0 + 1e-12) + 1e-15 else math.inf
    if alpha < 1.0:
        raise InputError("penalty requires alpha >= 1")
    coef = (alpha - 1.0) * alpha ** (alpha / (1.0 - alpha)) * lam ** (1.0 / (1.0 - alpha))
    try:
        return coef * L ** (alpha / (alpha - 1.0))
    except OverflowError:
        return math.inf


def _penalty_slope(lam: float, alpha: float, L: float) -> float:
    """d penalty / dL on the smooth branches (alpha > 1 or inf)."""
    if math.isinf(alpha):
        return lam
    coef = (alpha - 1.0) * alpha ** (alpha / (1.0 - alpha)) * lam ** (1.0 / (1.0 - alpha))
    expo = alpha / (alpha - 1.0)
    if L <= 0.0:
        return 0.0
    try:
        return coef * expo * L ** (expo - 1.0)
    except OverflowError:
        return math.inf


def pasch_hausdorff(space: FiniteMetricSpace, f, lam: float) -> np.ndarray:
    """Greatest lam-Lipschitz minorant of f: f_i -> min_j (f_j + lam*d_ij)."""
    f = np.asarray(f, dtype=float)
    return np.min(f[None, :] + lam * space.dist, axis=1)


# ---------------------------------------------------------------------------
# primal path
# ---------------------------------------------------------------------------

def _prob(m, n):
    w = m.weights if isinstance(m, DiscreteMeasure) else np.asarray(m, dtype=float)
    if w.shape != (n,):
        raise InputError("measure does not match the space")
    if abs(w.sum() - 1.0) > 1e-9 or np.any(w < 0):
        raise InputError("probability vector required")
    return w


def _divergence_expr(spec: GeneratorSpec, xi, nu: np.ndarray):
    """DCP expression of xi -> D(xi || nu) plus its support constraints."""
    supp = nu > 0.0
    ns = nu[supp]
    constraints = []
    if not math.isfinite(spec.phi_prime_inf) and not np.all(supp):
        constraints.append(xi[np.where(~supp)[0]] == 0)
    name = spec.name
    if name == "kl":
        expr = cp.sum(cp.rel_entr(xi[np.where(supp)[0]], ns))
    elif name == "reverse_kl":
        expr = cp.sum(cp.rel_entr(ns, xi[np.where(supp)[0]]))
    elif name == "chi2":
        expr = cp.sum(cp.multiply(1.0 / ns, cp.square(xi[np.where(supp)[0]] - ns)))
    elif name == "reverse_chi2":
        expr = cp.sum(cp.multiply(ns**2, cp.inv_pos(xi[np.where(supp)[0]]))) - 1.0
    elif name == "squared_hellinger":
        expr = 2.0 - 2.0 * cp.sum(cp.multiply(np.sqrt(ns), cp.sqrt(xi[np.where(supp)[0]])))
    elif name == "jensen_shannon":
        mid = 0.5 * (xi + nu)
        expr = cp.sum(cp.rel_entr(xi, mid)) + cp.sum(cp.rel_entr(nu, mid))
    elif name == "jeffreys":
        idx = np.where(supp)[0]
        expr = cp.sum(cp.rel_entr(xi[idx], ns)) + cp.sum(cp.rel_entr(ns, xi[idx]))
    elif name == "triangular":
        idx = np.arange(nu.size)
        expr = cp.sum(
            [cp.quad_over_lin(xi[i] - nu[i], xi[i] + nu[i]) for i in idx]
        )
    elif name == "total_variation":
        expr = cp.norm1(xi - nu)
    else:
        raise InputError(f"no conic form for generator {name!r}")
    return expr, constraints


def _clean_xi(spec, raw, nu):
    xi = np.maximum(np.asarray(raw, dtype=float), 0.0)
    if not math.isfinite(spec.phi_prime_inf):
        xi[nu <= 0.0] = 0.0
    if spec.name in ("reverse_kl", "reverse_chi2", "jeffreys"):
        # keep support-interior points strictly positive; the divergence is
        # +inf at an exact zero against positive reference mass
        xi[nu > 0.0] = np.maximum(xi[nu > 0.0], 1e-300)
    total = xi.sum()
    if total <= 0:
        raise SolverError("primal solver returned the zero vector", {})
    return xi / total


def my_primal(
    spec: GeneratorSpec,
    space: FiniteMetricSpace,
    mu,
    nu,
    params: MYParams,
    cfg: MYConfig = DEFAULT_MY_CONFIG,
) -> MYResult:
    """Infimal convolution value by direct minimization over the simplex."""
    n = space.n
    mu = _prob(mu, n)
    nu = _prob(nu, n)
    alpha = params.alpha

    if spec.is_trivial:
        w1 = w1_primal(space, mu, nu).cost
        if math.isinf(alpha):
            value = 0.0 if w1 <= params.beta + 1e-12 else math.inf
        else:
            value = params.lam_effective * w1**alpha
        return MYResult(value=value, xi_star=DiscreteMeasure(nu), method="closed-form")

    if not math.isinf(alpha) and alpha < 1.0:
        return _primal_subgradient(spec, space, mu, nu, params, cfg)

    xi = cp.Variable(n, nonneg=True)
    pi = cp.Variable((n, n), nonneg=True)
    t = cp.sum(cp.multiply(pi, space.dist))
    div, constraints = _divergence_expr(spec, xi, nu)
    constraints += [
        cp.sum(xi) == 1,
        cp.sum(pi, axis=1) == mu,
        cp.sum(pi, axis=0) == xi,
    ]
    if math.isinf(alpha):
        objective = div
        constraints.append(t <= params.beta)
    elif alpha == 1.0:
        objective = div + params.lam_effective * t
    else:
        objective = div + params.lam_effective * cp.power(t, alpha)
    prob = cp.Problem(cp.Minimize(objective), constraints)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError:
        prob.solve(solver=cp.SCS, eps=1e-10, max_iters=200000)
    if prob.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return MYResult(value=math.inf, method="conic")
    if xi.value is None:
        raise SolverError("primal conic solve failed", {"status": prob.status})
    xi_star = _clean_xi(spec, xi.value, nu)
    w1 = w1_primal(space, mu, xi_star).cost
    div_val = exact_divergence(spec, DiscreteMeasure(xi_star), DiscreteMeasure(nu))
    if math.isinf(alpha):
        value = div_val
        gap = max(0.0, w1 - params.beta)
    else:
        value = div_val + params.lam_effective * w1**alpha
        gap = abs(value - float(prob.value))
    iters = getattr(prob.solver_stats, "num_iters", 0) or 0
    return MYResult(
        value=float(value),
        xi_star=DiscreteMeasure(xi_star),
        iterations=int(iters),
        converged=prob.status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE),
        gap=gap,
        method="conic",
    )


def _project_simplex(v, mask=None):
    """Euclidean projection onto the simplex, optionally zero off the mask."""
    v = np.asarray(v, dtype=float)
    if mask is not None:
        w = np.zeros_like(v)
        w[mask] = _project_simplex(v[mask])
        return w
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u + (1.0 - css) / np.arange(1, v.size + 1) > 0)[0][-1]
    theta = (1.0 - css[rho]) / (rho + 1.0)
    return np.maximum(v + theta, 0.0)


def _primal_subgradient(spec, space, mu, nu, params, cfg):
    """Projected subgradient descent over the simplex.

    Used for the experimental 0 < alpha < 1 regime where the transport term
    is not convex and the conic formulation does not apply.
    """
    alpha = params.alpha
    lam = params.lam_effective
    supp = nu > 0.0
    mask = supp if not math.isfinite(spec.phi_prime_inf) else None
    xi = _project_simplex(nu.copy(), mask)
    best_xi, best_val = xi, math.inf
    step0 = cfg.primal_step if cfg.primal_step is not None else 0.1
    for it in range(1, cfg.primal_iters + 1):
        w1, f_k = kantorovich_dual(space, mu, xi)
        div_val = exact_divergence(spec, DiscreteMeasure(xi), DiscreteMeasure(nu))
        val = div_val + lam * w1**alpha
        if val < best_val:
            best_val, best_xi = val, xi.copy()
        g = np.zeros_like(xi)
        active = supp & (xi > 0.0)
        if spec.is_legendre:
            with np.errstate(divide="ignore"):
                g[active] = np.asarray(
                    spec.potential_from_ratio(xi[active] / nu[active])
                )
        g = np.clip(g, -1e6, 1e6)
        if w1 > 0.0:
            g -= alpha * lam * w1 ** (alpha - 1.0) * f_k
        xi = _project_simplex(xi - step0 / math.sqrt(it) * g, mask)
    w1 = w1_primal(space, mu, best_xi).cost
    value = exact_divergence(spec, DiscreteMeasure(best_xi), DiscreteMeasure(nu))
    value += lam * w1**alpha
    return MYResult(
        value=float(min(value, best_val)),
        xi_star=DiscreteMeasure(best_xi),
        iterations=cfg.primal_iters,
        converged=True,
        method="subgradient-experimental",
    )


# ---------------------------------------------------------------------------
# dual path
# ---------------------------------------------------------------------------

def _lipschitz_subgradient(space: FiniteMetricSpace, f: np.ndarray):
    """Subgradient of the Lipschitz norm at f, on the first argmax pair."""
    n = space.n
    diff = np.abs(f[:, None] - f[None, :])
    off = ~np.eye(n, dtype=bool)
    q = np.where(off, diff / np.where(off, space.dist, 1.0), -np.inf)
    L = float(np.max(q))
    g = np.zeros(n)
    if L <= 0.0:
        return L, g
    ii, jj = np.nonzero(q >= L - 1e-15)
    upper = ii < jj
    i, j = int(ii[upper][0]), int(jj[upper][0])  # lexicographic tie-break
    s = math.copysign(1.0, f[i] - f[j]) / space.dist[i, j]
    g[i], g[j] = s, -s
    return L, g


def my_dual(
    spec: GeneratorSpec,
    space: FiniteMetricSpace,
    mu,
    nu,
    params: MYParams,
    cfg: MYConfig = DEFAULT_MY_CONFIG,
) -> MYResult:
    """Variational value by ascent over potentials with f[0] = 0."""
    n = space.n
    mu = _prob(mu, n)
    nu = _prob(nu, n)
    alpha = params.alpha
    hard = not math.isinf(alpha) and alpha == 1.0
    lam = params.beta if math.isinf(alpha) else params.lam_effective

    def feasible(f):
        f = f - f[0]
        if hard:
            f = pasch_hausdorff(space, f, lam)
            f = f - f[0]
        return f

    def objective_and_grad(f):
        value, cgrad, _ = conjugate_value_and_gradient(spec, f, nu, cfg.newton)
        obj = float(mu @ f) - value
        grad = mu - cgrad
        if not hard:
            L, gl = _lipschitz_subgradient(space, f)
            obj -= penalty(lam, alpha, L)
            grad = grad - _penalty_slope(lam, alpha, L) * gl
        return obj, grad

    f = np.zeros(n)
    best_f, best_obj = f.copy(), objective_and_grad(f)[0]
    converged = True
    for _ in range(cfg.dual_iters):
        obj, grad = objective_and_grad(f)
        if not math.isfinite(obj):
            converged = False
            break
        if obj > best_obj:
            best_obj, best_f = obj, f.copy()
        f = feasible(f + cfg.dual_lr * grad)
    obj, _ = objective_and_grad(f)
    if math.isfinite(obj) and obj > best_obj:
        best_obj, best_f = obj, f.copy()

    iterations = cfg.dual_iters
    if cfg.polish and n > 1 and not hard:
        # epigraph form: maximize over (f, L) with f_i - f_j <= L * d_ij;
        # the penalty is smooth in L, so constrained gradient polish applies
        ii, jj = np.nonzero(~np.eye(n, dtype=bool))
        dij = space.dist[ii, jj]

        def neg_and_grad(z):
            f_full = np.concatenate(([0.0], z[:-1]))
            L = max(z[-1], 0.0)
            try:
                value, cgrad, _ = conjugate_value_and_gradient(spec, f_full, nu, cfg.newton)
            except SolverError:
                return 1e30, np.zeros(n)
            if not math.isfinite(value):
                return 1e30, np.zeros(n)
            obj = float(mu @ f_full) - value - penalty(lam, alpha, L)
            grad = np.empty(n)
            grad[:-1] = (mu - cgrad)[1:]
            grad[-1] = -_penalty_slope(lam, alpha, L)
            return -obj, -grad

        def cons_fun(z):
            f_full = np.concatenate(([0.0], z[:-1]))
            return z[-1] * dij - (f_full[ii] - f_full[jj])

        def cons_jac(z):
            jac = np.zeros((ii.size, n))
            for row in range(ii.size):
                if ii[row] >= 1:
                    jac[row, ii[row] - 1] = -1.0
                if jj[row] >= 1:
                    jac[row, jj[row] - 1] = 1.0
                jac[row, -1] = dij[row]
            return jac

        z0 = np.concatenate([best_f[1:] - best_f[0], [lipschitz_norm(space, best_f) + 1e-9]])
        res = optimize.minimize(
            neg_and_grad,
            z0,
            jac=True,
            method="SLSQP",
            constraints=[{"type": "ineq", "fun": cons_fun, "jac": cons_jac}],
            bounds=[(None, None)] * (n - 1) + [(0.0, None)],
            options={"maxiter": 500, "ftol": 1e-14},
        )
        cand = feasible(np.concatenate(([0.0], res.x[:-1])))
        cand_obj = objective_and_grad(cand)[0]
        if math.isfinite(cand_obj) and cand_obj > best_obj:
            best_obj, best_f = cand_obj, cand
        iterations += int(res.nit)
    if cfg.polish and n > 1 and hard:
        # with a hard Lipschitz bound the feasible set is a polytope in f and
        # the objective is smooth, so constrained gradient polish applies
        ii, jj = np.nonzero(~np.eye(n, dtype=bool))

        def neg_and_grad(x):
            g = np.concatenate(([0.0], x))
            val, grad = objective_and_grad(g)
            if not math.isfinite(val):
                return 1e30, np.zeros(n - 1)
            return -val, -grad[1:]

        cons = {
            "type": "ineq",
            "fun": lambda x: lam * space.dist[ii, jj]
            - (np.concatenate(([0.0], x))[ii] - np.concatenate(([0.0], x))[jj]),
        }
        start = pasch_hausdorff(space, best_f, lam * (1.0 - 1e-12))
        res = optimize.minimize(
            neg_and_grad,
            (start - start[0])[1:],
            jac=True,
            method="SLSQP",
            constraints=[cons],
            options={"maxiter": 500, "ftol": 1e-14},
        )
        cand = feasible(np.concatenate(([0.0], res.x)))
        cand_obj = objective_and_grad(cand)[0]
        if math.isfinite(cand_obj) and cand_obj > best_obj:
            best_obj, best_f = cand_obj, cand
        iterations += int(res.nit)
    if cfg.polish and n > 1:
        def neg(x):
            g = feasible(np.concatenate(([0.0], x)))
            val = objective_and_grad(g)[0]
            return -val if math.isfinite(val) else 1e30

        res = optimize.minimize(
            neg,
            best_f[1:],
            method="Nelder-Mead",
            options={
                "maxiter": cfg.polish_maxiter,
                "maxfev": 4 * cfg.polish_maxiter,
                "xatol": 1e-11,
                "fatol": 1e-13,
            },
        )
        cand = feasible(np.concatenate(([0.0], res.x)))
        cand_obj = objective_and_grad(cand)[0]
        if math.isfinite(cand_obj) and cand_obj > best_obj:
            best_obj, best_f = cand_obj, cand
        iterations += int(res.nfev)

    return MYResult(
        value=float(best_obj),
        f_star=feasible(best_f),
        iterations=iterations,
        converged=converged,
        method="ascent+polish" if cfg.polish else "ascent",
    )


# ---------------------------------------------------------------------------
# optimality structure
# ---------------------------------------------------------------------------

@dataclasses.dataclass
class StructureReport:
    lipschitz_target: Optional[float]
    lipschitz_actual: float
    lipschitz_gap: Optional[float]
    csiszar: CsiszarReport
    pairing_gap: float
    ok: bool

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["csiszar"] = self.csiszar.to_dict()
        return d


def check_optimality_structure(
    spec: GeneratorSpec,
    space: FiniteMetricSpace,
    mu,
    nu,
    params: MYParams,
    primal: MYResult,
    dual: MYResult,
    tol: float = 1e-2,
) -> StructureReport:
    """Cross-check the primal minimizer against the dual maximizer."""
    if primal.xi_star is None or dual.f_star is None:
        raise InputError("both results must carry their optimizers")
    if not (primal.converged and dual.converged):
        raise InputError("both results must be converged")
    mu = _prob(mu, space.n)
    nu = _prob(nu, space.n)
    xi = primal.xi_star.weights
    f = np.asarray(dual.f_star, dtype=float)
    alpha = params.alpha
    w1 = w1_primal(space, mu, xi).cost
    L = lipschitz_norm(space, f)

    target = None
    lip_gap = None
    ok = True
    if not math.isinf(alpha) and alpha > 1.0:
        target = alpha * params.lam_effective * w1 ** (alpha - 1.0)
        lip_gap = abs(L - target)
        ok = ok and lip_gap <= tol * (1.0 + abs(target))

    cs = check_csiszar_potential(spec, xi, nu, f, tol)
    ok = ok and cs.ok

    pairing = abs(float((mu - xi) @ f) - L * w1)
    ok = ok and pairing <= tol * (1.0 + L * w1)

    return StructureReport(
        lipschitz_target=target,
        lipschitz_actual=L,
        lipschitz_gap=lip_gap,
        csiszar=cs,
        pairing_gap=pairing,
        ok=bool(ok),
    )
