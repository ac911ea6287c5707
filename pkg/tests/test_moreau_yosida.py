"""Moreau-Yosida approximation: parameters, penalty, primal/dual agreement."""

import math

import numpy as np
import pytest

from myfdiv.errors import InputError
from myfdiv.generators import get_spec
from myfdiv.measures import DiscreteMeasure, FiniteMetricSpace, exact_divergence
from myfdiv.moreau_yosida import (
    MYConfig,
    MYParams,
    check_optimality_structure,
    my_dual,
    my_primal,
    pasch_hausdorff,
    penalty,
)
from myfdiv.transport import lipschitz_norm, w1_primal

CFG = MYConfig(dual_iters=300, dual_lr=0.05, polish=True, polish_maxiter=2000)


def _instance(seed, n=5):
    rng = np.random.default_rng(seed)
    space = FiniteMetricSpace.from_points(rng.normal(size=(n, 2)))
    return space, rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))


def test_params_validation():
    with pytest.raises(InputError):
        MYParams(alpha=2.0)  # neither lam nor beta
    with pytest.raises(InputError):
        MYParams(alpha=2.0, lam=1.0, beta=1.0)  # both
    with pytest.raises(InputError):
        MYParams(alpha=2.0, lam=-1.0)
    with pytest.raises(InputError):
        MYParams(alpha=math.inf, lam=1.0)  # infinite order takes beta
    with pytest.raises(InputError):
        MYParams(alpha=math.inf)
    with pytest.raises(InputError):
        MYParams(alpha=0.0, lam=1.0)
    p = MYParams(alpha=2.0, beta=0.5)
    # lam = beta**(-alpha) / alpha
    assert p.lam_effective == pytest.approx(0.5 ** (-2.0) / 2.0)
    with pytest.raises(InputError):
        MYParams(alpha=math.inf, beta=1.0).lam_effective


def test_penalty_values():
    # order 2: (alpha-1) alpha^{alpha/(1-alpha)} lam^{1/(1-alpha)} L^{alpha/(alpha-1)}
    # reduces to L^2 / (4 lam)
    assert penalty(2.0, 2.0, 3.0) == pytest.approx(9.0 / 8.0)
    assert penalty(0.5, 2.0, 1.0) == pytest.approx(0.5)
    assert penalty(1.0, 1.0, 0.5) == 0.0
    assert math.isinf(penalty(1.0, 1.0, 1.5))
    assert penalty(0.7, math.inf, 2.0) == pytest.approx(1.4)  # beta * L
    with pytest.raises(InputError):
        penalty(1.0, 2.0, -1.0)
    with pytest.raises(InputError):
        penalty(1.0, 0.5, 1.0)


def test_pasch_hausdorff_envelope():
    space = FiniteMetricSpace.from_points([[0.0], [1.0], [2.0]])
    f = np.array([0.0, 10.0, 0.0])
    g = pasch_hausdorff(space, f, lam=1.0)
    assert np.allclose(g, [0.0, 1.0, 0.0])
    assert lipschitz_norm(space, g) <= 1.0 + 1e-12
    # already-Lipschitz functions are fixed points
    h = np.array([0.0, 0.5, 1.0])
    assert np.allclose(pasch_hausdorff(space, h, lam=1.0), h)


def test_trivial_generator_closed_form():
    space, mu, nu = _instance(1)
    spec = get_spec("trivial")
    w1 = w1_primal(space, mu, nu).cost
    for alpha, lam in ((1.0, 0.5), (2.0, 2.0)):
        res = my_primal(spec, space, mu, nu, MYParams(alpha=alpha, lam=lam), CFG)
        assert res.value == pytest.approx(lam * w1**alpha, rel=1e-9)


def test_infinite_order_ball():
    space, mu, nu = _instance(2)
    spec = get_spec("trivial")
    w1 = w1_primal(space, mu, nu).cost
    inside = my_primal(spec, space, mu, nu, MYParams(alpha=math.inf, beta=1.2 * w1), CFG)
    outside = my_primal(spec, space, mu, nu, MYParams(alpha=math.inf, beta=0.8 * w1), CFG)
    assert inside.value == 0.0
    assert math.isinf(outside.value)


def test_infinite_order_constrained_divergence():
    space, mu, nu = _instance(3)
    spec = get_spec("kl")
    div = exact_divergence(spec, DiscreteMeasure(mu), DiscreteMeasure(nu))
    tight = my_primal(spec, space, mu, nu, MYParams(alpha=math.inf, beta=1e-4), CFG)
    loose = my_primal(spec, space, mu, nu, MYParams(alpha=math.inf, beta=100.0), CFG)
    assert tight.value == pytest.approx(div, rel=1e-2)
    assert loose.value == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("name", ["kl", "chi2", "jensen_shannon"])
@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_primal_dual_agreement(name, alpha):
    spec = get_spec(name)
    space, mu, nu = _instance(42)
    params = MYParams(alpha=alpha, lam=1.0)
    primal = my_primal(spec, space, mu, nu, params, CFG)
    dual = my_dual(spec, space, mu, nu, params, CFG)
    assert abs(primal.value - dual.value) <= 1e-3 * (1.0 + abs(primal.value))


def test_primal_value_between_zero_and_divergence():
    spec = get_spec("chi2")
    space, mu, nu = _instance(8)
    params = MYParams(alpha=2.0, lam=1.0)
    res = my_primal(spec, space, mu, nu, params, CFG)
    div = exact_divergence(spec, DiscreteMeasure(mu), DiscreteMeasure(nu))
    w1 = w1_primal(space, mu, nu).cost
    assert -1e-12 <= res.value <= min(div, w1**2) + 1e-8


def test_dual_alpha_one_potential_is_feasible():
    spec = get_spec("kl")
    space, mu, nu = _instance(12)
    lam = 0.7
    dual = my_dual(spec, space, mu, nu, MYParams(alpha=1.0, lam=lam), CFG)
    assert lipschitz_norm(space, dual.f_star) <= lam * (1.0 + 1e-9)
    assert dual.f_star[0] == pytest.approx(0.0, abs=1e-12)


def test_structure_report():
    spec = get_spec("kl")
    space, mu, nu = _instance(21)
    params = MYParams(alpha=2.0, lam=1.0)
    primal = my_primal(spec, space, mu, nu, params, CFG)
    dual = my_dual(spec, space, mu, nu, params, CFG)
    report = check_optimality_structure(spec, space, mu, nu, params, primal, dual, tol=1e-2)
    assert report.ok
    assert report.lipschitz_target is not None
    d = report.to_dict()
    assert "csiszar" in d and "pairing_gap" in d


def test_structure_requires_optimizers():
    spec = get_spec("kl")
    space, mu, nu = _instance(22)
    params = MYParams(alpha=2.0, lam=1.0)
    primal = my_primal(spec, space, mu, nu, params, CFG)
    dual = my_dual(spec, space, mu, nu, params, CFG)
    dual.f_star = None
    with pytest.raises(InputError):
        check_optimality_structure(spec, space, mu, nu, params, primal, dual)


def test_monotone_in_lam():
    spec = get_spec("kl")
    space, mu, nu = _instance(30)
    values = [
        my_primal(spec, space, mu, nu, MYParams(alpha=2.0, lam=lam), CFG).value
        for lam in (0.25, 1.0, 4.0)
    ]
    assert values[0] <= values[1] + 1e-9 <= values[2] + 2e-9


def test_experimental_low_order_primal_runs():
    spec = get_spec("chi2")
    space, mu, nu = _instance(31)
    cfg = MYConfig(primal_iters=300)
    res = my_primal(spec, space, mu, nu, MYParams(alpha=0.5, lam=1.0), cfg)
    assert res.method == "subgradient-experimental"
    div = exact_divergence(spec, DiscreteMeasure(mu), DiscreteMeasure(nu))
    assert -1e-12 <= res.value <= div + 1e-9
