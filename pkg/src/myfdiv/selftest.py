"""Validation suite checked by both the CLI and the acceptance tests.

Each check is a self-contained seeded experiment with a pass/fail verdict
and a details string.  Tolerances and budgets are fixed here so the CLI and
the test suite always agree on what passing means.
"""

from __future__ import annotations

import dataclasses
import math
import time
from typing import Callable, Dict, List, Optional

import numpy as np

from .conjugate import conjugate_value, conjugate_value_and_gradient, solve_gamma
from .estimator import (
    AscentConfig,
    GaussianParams,
    estimate_divergence,
    gaussian_experiment,
)
from .generators import GENERATOR_NAMES, get_spec, lambert_w
from .measures import DiscreteMeasure, FiniteMetricSpace, exact_divergence
from .moreau_yosida import MYConfig, MYParams, check_optimality_structure, my_dual, my_primal
from .transport import kantorovich_dual, lipschitz_norm, w1_primal

__all__ = ["CheckResult", "CHECKS", "run_selftest"]

NEWTON_GENERATORS = [
    "kl",
    "reverse_kl",
    "chi2",
    "reverse_chi2",
    "squared_hellinger",
    "jensen_shannon",
    "jeffreys",
    "triangular",
]

_ASCENT = AscentConfig(learning_rate=0.1, iterations=50, polish=True)
_MY_CFG = MYConfig(dual_iters=300, dual_lr=0.05, polish=True, polish_maxiter=2000)


@dataclasses.dataclass
class CheckResult:
    name: str
    ok: bool
    duration: float
    details: str

    def to_dict(self):
        return dataclasses.asdict(self)


def _random_pair(rng, n):
    return rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))


def _random_space(rng, n=5):
    w = rng.uniform(0.2, 2.0, size=(n, n))
    return FiniteMetricSpace.from_shortest_path(w)


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

def check_categorical_recovery() -> CheckResult:
    """Variational estimates match exact values on random 10-category pairs."""
    start = time.time()
    lines = []
    ok = True
    rng = np.random.default_rng(1234)
    pairs = [_random_pair(rng, 10) for _ in range(20)]
    for name in NEWTON_GENERATORS:
        spec = get_spec(name)
        tol = 1e-2 if name == "reverse_chi2" else 1e-4
        worst = 0.0
        for mu, nu in pairs:
            exact = exact_divergence(spec, DiscreteMeasure(mu), DiscreteMeasure(nu))
            res = estimate_divergence(spec, mu, nu, _ASCENT)
            worst = max(worst, abs(res.estimate - exact))
        good = worst <= tol
        ok = ok and good
        lines.append(f"{name}: worst |estimate-exact| = {worst:.2e} (tol {tol:g})")
    elapsed = time.time() - start
    if elapsed > 60.0:
        ok = False
        lines.append(f"runtime {elapsed:.1f}s exceeded the 60s budget")
    return CheckResult("categorical_recovery", ok, elapsed, "; ".join(lines))


def check_closed_form_gamma() -> CheckResult:
    """Newton gamma vs the log-mean-exp closed form; explicit TV conjugate."""
    start = time.time()
    rng = np.random.default_rng(2024)
    kl = get_spec("kl")
    tv = get_spec("total_variation")
    worst_gamma = 0.0
    worst_tv = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 33))
        f = rng.normal(scale=2.0, size=n)
        nu = rng.dirichlet(np.ones(n))
        newton = solve_gamma(kl, f, nu, method="newton").gamma
        m = float(np.max(f))
        closed = m + math.log(float(nu @ np.exp(f - m)))
        worst_gamma = max(worst_gamma, abs(newton - closed))
        gamma_tv = float(np.max(f)) - 1.0
        oracle = float(nu @ np.maximum(f - gamma_tv, -1.0)) + gamma_tv
        worst_tv = max(worst_tv, abs(conjugate_value(tv, f, nu) - oracle))
    ok = worst_gamma <= 1e-10 and worst_tv <= 1e-12
    details = (
        f"kl |newton gamma - closed form| = {worst_gamma:.2e} (tol 1e-10); "
        f"tv |conjugate - piecewise oracle| = {worst_tv:.2e} (tol 1e-12)"
    )
    return CheckResult("closed_form_gamma", ok, time.time() - start, details)


def check_implicit_gradients() -> CheckResult:
    """Gamma and conjugate gradients against central finite differences."""
    start = time.time()
    h = 1e-5
    lines = []
    ok = True
    for gen_index, name in enumerate(NEWTON_GENERATORS):
        spec = get_spec(name)
        rng = np.random.default_rng(3000 + gen_index)
        worst_g = worst_c = worst_simplex = 0.0
        for _ in range(50):
            n = int(rng.integers(3, 8))
            f = rng.normal(size=n)
            nu = rng.dirichlet(np.ones(n))
            sol = solve_gamma(spec, f, nu, method="newton")
            fd = np.zeros(n)
            for i in range(n):
                e = np.zeros(n)
                e[i] = h
                up = solve_gamma(spec, f + e, nu, method="newton").gamma
                dn = solve_gamma(spec, f - e, nu, method="newton").gamma
                fd[i] = (up - dn) / (2.0 * h)
            worst_g = max(
                worst_g, float(np.max(np.abs(sol.grad - fd))) / (1.0 + float(np.max(np.abs(fd))))
            )
            worst_simplex = max(
                worst_simplex,
                abs(float(sol.grad.sum()) - 1.0),
                max(0.0, -float(sol.grad.min())),
            )
            _, grad, _ = conjugate_value_and_gradient(spec, f, nu, method="newton")
            fdc = np.zeros(n)
            for i in range(n):
                e = np.zeros(n)
                e[i] = h
                up = conjugate_value(spec, f + e, nu, method="newton")
                dn = conjugate_value(spec, f - e, nu, method="newton")
                fdc[i] = (up - dn) / (2.0 * h)
            worst_c = max(
                worst_c, float(np.max(np.abs(grad - fdc))) / (1.0 + float(np.max(np.abs(fdc))))
            )
        good = worst_g <= 1e-6 and worst_c <= 1e-6 and worst_simplex <= 1e-8
        ok = ok and good
        lines.append(f"{name}: gamma {worst_g:.1e}, conj {worst_c:.1e}, simplex {worst_simplex:.1e}")
    details = "rel FD error (tol 1e-6), simplex violation (tol 1e-8): " + "; ".join(lines)
    return CheckResult("implicit_gradients", ok, time.time() - start, details)


def check_topicality() -> CheckResult:
    """conjugate(f + c) = conjugate(f) + c for every generator."""
    start = time.time()
    rng = np.random.default_rng(555)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 9))
        f = rng.normal(size=n)
        nu = rng.dirichlet(np.ones(n))
        c = float(rng.normal(scale=2.0))
        for name in GENERATOR_NAMES:
            spec = get_spec(name)
            base = conjugate_value(spec, f, nu)
            shifted = conjugate_value(spec, f + c, nu)
            worst = max(worst, abs(shifted - (base + c)))
    ok = worst <= 1e-8
    return CheckResult(
        "topicality",
        ok,
        time.time() - start,
        f"worst |conjugate(f+c) - conjugate(f) - c| = {worst:.2e} (tol 1e-8)",
    )


def check_kantorovich_duality() -> CheckResult:
    """Dual LP value equals primal transport cost; potentials 1-Lipschitz."""
    start = time.time()
    worst_gap = worst_lip = 0.0
    for seed in range(30):
        rng = np.random.default_rng(9000 + seed)
        space = _random_space(rng)
        mu, nu = _random_pair(rng, space.n)
        primal = w1_primal(space, mu, nu).cost
        dual, f = kantorovich_dual(space, mu, nu)
        worst_gap = max(worst_gap, abs(primal - dual))
        worst_lip = max(worst_lip, lipschitz_norm(space, f) - 1.0)
    ok = worst_gap <= 1e-7 and worst_lip <= 1e-9
    details = (
        f"worst duality gap = {worst_gap:.2e} (tol 1e-7); "
        f"worst Lipschitz excess = {worst_lip:.2e} (tol 1e-9)"
    )
    return CheckResult("kantorovich_duality", ok, time.time() - start, details)


def check_moreau_yosida_gap() -> CheckResult:
    """Primal and dual Moreau-Yosida values agree across solvers."""
    start = time.time()
    ok = True
    worst = 0.0
    worst_case = ""
    for seed in range(20):
        rng = np.random.default_rng(4000 + seed)
        space = _random_space(rng)
        mu, nu = _random_pair(rng, space.n)
        for name in ("kl", "chi2", "jensen_shannon", "trivial"):
            spec = get_spec(name)
            for alpha in (1.0, 2.0):
                for lam in (0.5, 2.0):
                    params = MYParams(alpha=alpha, lam=lam)
                    pr = my_primal(spec, space, mu, nu, params, _MY_CFG)
                    if spec.is_trivial:
                        w1 = w1_primal(space, mu, nu).cost
                        dv = lam * w1**alpha
                    else:
                        dv = my_dual(spec, space, mu, nu, params, _MY_CFG).value
                    gap = abs(pr.value - dv)
                    tol = 1e-3 * (1.0 + abs(pr.value))
                    rel = gap / tol
                    if rel > worst:
                        worst = rel
                        worst_case = f"{name} alpha={alpha} lam={lam} seed={seed} gap={gap:.2e}"
                    ok = ok and gap <= tol
    elapsed = time.time() - start
    if elapsed > 600.0:
        ok = False
        worst_case += f"; runtime {elapsed:.0f}s exceeded the 600s budget"
    details = f"worst gap/tolerance ratio = {worst:.3f} ({worst_case})"
    return CheckResult("moreau_yosida_gap", ok, elapsed, details)


def check_optimality_structure_suite() -> CheckResult:
    """Dual maximizers satisfy the joint optimality conditions."""
    start = time.time()
    lines = []
    ok = True
    # trivial generator, quadratic index: the optimal potential's Lipschitz
    # norm must equal 2 * lam * W1(mu, nu)
    trivial = get_spec("trivial")
    worst_rel = 0.0
    for seed in range(10):
        rng = np.random.default_rng(7100 + seed)
        space = _random_space(rng)
        mu, nu = _random_pair(rng, space.n)
        lam = float(rng.uniform(0.5, 2.0))
        params = MYParams(alpha=2.0, lam=lam)
        dual = my_dual(trivial, space, mu, nu, params, _MY_CFG)
        target = 2.0 * lam * w1_primal(space, mu, nu).cost
        rel = abs(lipschitz_norm(space, dual.f_star) - target) / max(target, 1e-12)
        worst_rel = max(worst_rel, rel)
    good = worst_rel <= 0.02
    ok = ok and good
    lines.append(f"trivial alpha=2: worst Lipschitz norm rel error = {worst_rel:.2e} (tol 2%)")

    failures = 0
    total = 0
    for seed in range(5):
        rng = np.random.default_rng(7200 + seed)
        space = _random_space(rng)
        mu, nu = _random_pair(rng, space.n)
        for name in ("kl", "chi2", "jensen_shannon"):
            spec = get_spec(name)
            params = MYParams(alpha=2.0, lam=1.0)
            pr = my_primal(spec, space, mu, nu, params, _MY_CFG)
            du = my_dual(spec, space, mu, nu, params, _MY_CFG)
            if not (pr.converged and du.converged):
                continue
            total += 1
            report = check_optimality_structure(spec, space, mu, nu, params, pr, du, tol=1e-2)
            if not report.ok:
                failures += 1
    good = failures == 0 and total > 0
    ok = ok and good
    lines.append(f"structure reports: {total - failures}/{total} converged instances pass (tol 1e-2)")
    return CheckResult("optimality_structure", ok, time.time() - start, "; ".join(lines))


def check_moreau_yosida_properties() -> CheckResult:
    """Monotonicity in lam, sandwich bound, Lipschitz-in-mu, infinite order."""
    start = time.time()
    lines = []
    ok = True

    monotone_bad = 0
    sandwich_worst = -math.inf
    for seed in range(20):
        rng = np.random.default_rng(5000 + seed)
        space = _random_space(rng)
        mu, nu = _random_pair(rng, space.n)
        name = ("kl", "chi2")[seed % 2]
        spec = get_spec(name)
        alpha = (1.0, 2.0)[seed % 2]
        values = []
        for lam in (0.25, 0.5, 1.0, 2.0, 4.0):
            params = MYParams(alpha=alpha, lam=lam)
            values.append(my_primal(spec, space, mu, nu, params, _MY_CFG).value)
        if any(a > b + 1e-9 for a, b in zip(values, values[1:])):
            monotone_bad += 1
        lam = 1.0
        value = values[2]
        div = exact_divergence(spec, DiscreteMeasure(mu), DiscreteMeasure(nu))
        w1 = w1_primal(space, mu, nu).cost
        sandwich_worst = max(sandwich_worst, value - min(div, lam * w1**alpha))
    good = monotone_bad == 0
    ok = ok and good
    lines.append(f"monotone in lam: {20 - monotone_bad}/20 instances")
    good = sandwich_worst <= 1e-8
    ok = ok and good
    lines.append(f"sandwich excess = {sandwich_worst:.2e} (tol 1e-8)")

    lip_worst = -math.inf
    kl = get_spec("kl")
    for seed in range(20):
        rng = np.random.default_rng(5100 + seed)
        space = _random_space(rng)
        mu1, nu = _random_pair(rng, space.n)
        mu2 = rng.dirichlet(np.ones(space.n))
        lam = float(rng.uniform(0.5, 2.0))
        params = MYParams(alpha=1.0, lam=lam)
        v1 = my_primal(kl, space, mu1, nu, params, _MY_CFG).value
        v2 = my_primal(kl, space, mu2, nu, params, _MY_CFG).value
        bound = lam * w1_primal(space, mu1, mu2).cost
        lip_worst = max(lip_worst, abs(v1 - v2) - bound)
    good = lip_worst <= 1e-7
    ok = ok and good
    lines.append(f"order-1 Lipschitz-in-mu excess = {lip_worst:.2e} (tol 1e-7)")

    ball_bad = 0
    trivial = get_spec("trivial")
    for seed in range(20):
        rng = np.random.default_rng(5200 + seed)
        space = _random_space(rng)
        mu, nu = _random_pair(rng, space.n)
        w1 = w1_primal(space, mu, nu).cost
        inside = my_primal(trivial, space, mu, nu, MYParams(alpha=math.inf, beta=1.1 * w1), _MY_CFG)
        outside = my_primal(trivial, space, mu, nu, MYParams(alpha=math.inf, beta=0.9 * w1), _MY_CFG)
        if not (inside.value == 0.0 and math.isinf(outside.value)):
            ball_bad += 1
    good = ball_bad == 0
    ok = ok and good
    lines.append(f"infinite order 0/inf ball: {20 - ball_bad}/20 instances")
    return CheckResult("moreau_yosida_properties", ok, time.time() - start, "; ".join(lines))


def check_gaussian_potentials() -> CheckResult:
    """Learned potentials match closed forms for discretized 1-D Gaussians."""
    start = time.time()
    params = GaussianParams(
        mu1=-1.0, sigma1=0.3, mu2=0.5, sigma2=0.6, grid_lo=-2.5, grid_hi=3.0, grid_n=512
    )
    lines = []
    ok = True
    for name in (
        "kl",
        "reverse_kl",
        "chi2",
        "reverse_chi2",
        "squared_hellinger",
        "jensen_shannon",
        "triangular",
    ):
        report = gaussian_experiment(get_spec(name), params, _ASCENT)
        good = report.converged and report.aligned_sup_error <= 0.05
        ok = ok and good
        lines.append(f"{name}: sup error = {report.aligned_sup_error:.3g} (tol 0.05)")
    jef = gaussian_experiment(get_spec("jeffreys"), params, _ASCENT)
    lines.append(
        f"jeffreys (not asserted): sup error = {jef.aligned_sup_error:.3g}, "
        f"converged = {jef.converged}"
    )
    elapsed = time.time() - start
    if elapsed > 300.0:
        ok = False
        lines.append(f"runtime {elapsed:.0f}s exceeded the 300s budget")
    return CheckResult("gaussian_potentials", ok, elapsed, "; ".join(lines))


def check_lambert_w() -> CheckResult:
    """Defining residual of the principal branch over a wide log grid."""
    start = time.time()
    inv_e = math.exp(-1.0)
    x = np.logspace(np.log10(1e-9), np.log10(1e6 + inv_e), 10000) - inv_e
    w = lambert_w(x)
    resid = np.abs(w * np.exp(w) - x) / (1.0 + np.abs(x))
    worst = float(np.max(resid))
    ok = worst <= 1e-12
    return CheckResult(
        "lambert_w",
        ok,
        time.time() - start,
        f"worst scaled residual |W e^W - x|/(1+|x|) = {worst:.2e} (tol 1e-12)",
    )


CHECKS: Dict[str, Callable[[], CheckResult]] = {
    "categorical_recovery": check_categorical_recovery,
    "closed_form_gamma": check_closed_form_gamma,
    "implicit_gradients": check_implicit_gradients,
    "topicality": check_topicality,
    "kantorovich_duality": check_kantorovich_duality,
    "moreau_yosida_gap": check_moreau_yosida_gap,
    "optimality_structure": check_optimality_structure_suite,
    "moreau_yosida_properties": check_moreau_yosida_properties,
    "gaussian_potentials": check_gaussian_potentials,
    "lambert_w": check_lambert_w,
}


def run_selftest(name_filter: Optional[str] = None) -> List[CheckResult]:
    """Run all checks whose name contains the filter substring."""
    results = []
    for name, fn in CHECKS.items():
        if name_filter and name_filter not in name:
            continue
        results.append(fn())
    return results
