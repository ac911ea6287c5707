"""Tight conjugate solver: closed forms, Newton path, gradients, potentials."""

import math

import numpy as np
import pytest

from myfdiv.conjugate import (
    SolverConfig,
    check_csiszar_potential,
    conjugate_gradient,
    conjugate_value,
    conjugate_value_and_gradient,
    solve_gamma,
)
from myfdiv.errors import InputError
from myfdiv.generators import GENERATOR_NAMES, get_spec

NEWTON = [n for n in GENERATOR_NAMES if get_spec(n).newton_applicable]


def _random_case(rng, n=6):
    return rng.normal(size=n), rng.dirichlet(np.ones(n))


def test_kl_gamma_is_log_mean_exp():
    rng = np.random.default_rng(0)
    spec = get_spec("kl")
    for _ in range(50):
        f, nu = _random_case(rng)
        closed = solve_gamma(spec, f, nu, method="closed_form").gamma
        newton = solve_gamma(spec, f, nu, method="newton").gamma
        m = float(np.max(f))
        oracle = m + math.log(float(nu @ np.exp(f - m)))
        assert closed == pytest.approx(oracle, abs=1e-12)
        assert newton == pytest.approx(oracle, abs=1e-10)


def test_kl_conjugate_gradient_is_softmax():
    spec = get_spec("kl")
    f = np.array([0.2, -1.0, 0.7])
    nu = np.array([0.5, 0.2, 0.3])
    grad = conjugate_gradient(spec, f, nu)
    weights = nu * np.exp(f)
    assert np.allclose(grad, weights / weights.sum(), atol=1e-12)


def test_tv_gamma_and_value():
    spec = get_spec("total_variation")
    f = np.array([0.2, -3.0, 0.1])
    nu = np.array([0.3, 0.3, 0.4])
    sol = solve_gamma(spec, f, nu)
    assert sol.gamma == pytest.approx(float(np.max(f)) - 1.0, abs=1e-15)
    gamma = sol.gamma
    oracle = float(nu @ np.maximum(f - gamma, -1.0)) + gamma
    assert conjugate_value(spec, f, nu) == pytest.approx(oracle, abs=1e-12)


def test_tv_subgradient_is_probability_vector():
    spec = get_spec("total_variation")
    rng = np.random.default_rng(5)
    for _ in range(20):
        f, nu = _random_case(rng)
        grad = conjugate_gradient(spec, f, nu)
        assert grad.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(grad >= -1e-15)


@pytest.mark.parametrize("name", NEWTON)
def test_newton_converges_and_grad_in_simplex(name):
    spec = get_spec(name)
    rng = np.random.default_rng(7)
    for _ in range(25):
        f, nu = _random_case(rng)
        sol = solve_gamma(spec, f, nu, method="newton")
        assert sol.converged
        assert sol.grad.sum() == pytest.approx(1.0, abs=1e-8)
        assert np.all(sol.grad >= -1e-8)


@pytest.mark.parametrize("name", GENERATOR_NAMES)
def test_topicality(name):
    spec = get_spec(name)
    rng = np.random.default_rng(21)
    for _ in range(10):
        f, nu = _random_case(rng)
        c = float(rng.normal(scale=3.0))
        assert conjugate_value(spec, f + c, nu) == pytest.approx(
            conjugate_value(spec, f, nu) + c, abs=1e-8
        )


@pytest.mark.parametrize("name", NEWTON)
def test_stabilization_shift_is_exact(name):
    # shifting by max(f) inside the solver must not change the value
    spec = get_spec(name)
    rng = np.random.default_rng(3)
    f, nu = _random_case(rng)
    f = f + 30.0  # large common offset
    a = conjugate_value(spec, f, nu, stabilize=True)
    b = conjugate_value(spec, f - 30.0, nu, stabilize=True) + 30.0
    assert a == pytest.approx(b, abs=1e-9)


def test_mean_deviation_substitution():
    # <mu,f> - conj(f) equals <mu-nu,f> - conj(f - <nu,f>)
    rng = np.random.default_rng(17)
    for name in ("kl", "chi2", "jensen_shannon"):
        spec = get_spec(name)
        f, nu = _random_case(rng)
        mu = rng.dirichlet(np.ones(f.size))
        c = float(nu @ f)
        lhs = float(mu @ f) - conjugate_value(spec, f, nu)
        rhs = float((mu - nu) @ f) - conjugate_value(spec, f - c, nu)
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_trivial_conjugate_is_mean():
    spec = get_spec("trivial")
    f = np.array([1.0, -2.0, 0.5])
    nu = np.array([0.2, 0.5, 0.3])
    value, grad, sol = conjugate_value_and_gradient(spec, f, nu)
    assert value == pytest.approx(float(nu @ f))
    assert np.allclose(grad, nu)
    assert sol is None
    with pytest.raises(InputError):
        solve_gamma(spec, f, nu)


def test_warm_start_agrees_with_cold_start():
    spec = get_spec("chi2")
    rng = np.random.default_rng(9)
    f, nu = _random_case(rng)
    cold = solve_gamma(spec, f, nu)
    warm = solve_gamma(spec, f, nu, gamma0=cold.gamma + 0.05)
    assert warm.gamma == pytest.approx(cold.gamma, abs=1e-10)


def test_input_validation():
    spec = get_spec("kl")
    with pytest.raises(InputError):
        conjugate_value(spec, np.array([0.0, 0.0]), np.array([0.7, 0.7]))
    with pytest.raises(InputError):
        conjugate_value(spec, np.array([np.inf, 0.0]), np.array([0.5, 0.5]))
    with pytest.raises(InputError):
        solve_gamma(spec, np.zeros(2), np.array([0.5, 0.5]), method="magic")
    with pytest.raises(InputError):
        SolverConfig(tol=-1.0)
    with pytest.raises(InputError):
        solve_gamma(get_spec("total_variation"), np.zeros(2), np.full(2, 0.5), method="newton")


def test_gamma_solution_serializes():
    spec = get_spec("kl")
    sol = solve_gamma(spec, np.array([0.0, 0.5]), np.array([0.5, 0.5]))
    d = sol.to_dict()
    assert set(d) == {"gamma", "grad", "iterations", "converged", "residual", "method"}


@pytest.mark.parametrize("name", [n for n in GENERATOR_NAMES if get_spec(n).is_legendre])
def test_csiszar_potential_accepts_optimal_and_rejects_noise(name):
    spec = get_spec(name)
    rng = np.random.default_rng(33)
    nu = rng.dirichlet(np.ones(5))
    mu = rng.dirichlet(np.ones(5))
    f = np.asarray(spec.potential_from_ratio(mu / nu))
    shift = float(rng.normal())
    report = check_csiszar_potential(spec, mu, nu, f + shift, tol=1e-8)
    assert report.ok, report
    bad = check_csiszar_potential(spec, mu, nu, f + rng.normal(scale=0.5, size=5), tol=1e-8)
    assert not bad.ok


def test_conjugate_value_of_optimal_potential_recovers_divergence():
    # plugging the optimal potential into the variational formula returns
    # the divergence itself
    from myfdiv.measures import DiscreteMeasure, exact_divergence

    rng = np.random.default_rng(41)
    nu = rng.dirichlet(np.ones(6))
    mu = rng.dirichlet(np.ones(6))
    for name in ("kl", "chi2", "squared_hellinger"):
        spec = get_spec(name)
        f = np.asarray(spec.potential_from_ratio(mu / nu))
        value = float(mu @ f) - conjugate_value(spec, f, nu)
        assert value == pytest.approx(
            exact_divergence(spec, DiscreteMeasure(mu), DiscreteMeasure(nu)), abs=1e-9
        )
