"""Variational divergence estimation on categorical and Gaussian inputs."""

import math

import numpy as np
import pytest

from myfdiv.errors import InputError
from myfdiv.estimator import (
    AscentConfig,
    GaussianParams,
    categorical_pair,
    categorical_recovery_error,
    estimate_divergence,
    gaussian_experiment,
    gaussian_potential_closed_form,
    gaussian_ratio,
)
from myfdiv.generators import get_spec
from myfdiv.measures import DiscreteMeasure, exact_divergence

CFG = AscentConfig(learning_rate=0.1, iterations=50, polish=True)


def test_gaussian_ratio_examples():
    p = GaussianParams(mu1=0.0, sigma1=1.0, mu2=1.0, sigma2=1.0, grid_lo=-5.0, grid_hi=6.0)
    assert gaussian_ratio(0.0, p) == pytest.approx(math.exp(0.5), rel=1e-12)
    assert gaussian_ratio(1.0, p) == pytest.approx(math.exp(-0.5), rel=1e-12)
    same = GaussianParams(mu1=0.0, sigma1=1.0, mu2=0.0, sigma2=1.0, grid_lo=-5.0, grid_hi=5.0)
    assert np.allclose(gaussian_ratio(np.array([-1.0, 0.0, 2.0]), same), 1.0)


def test_closed_form_potential_matches_generator():
    p = GaussianParams(mu1=0.0, sigma1=1.0, mu2=1.0, sigma2=1.0, grid_lo=-5.0, grid_hi=6.0)
    spec = get_spec("reverse_chi2")
    # the reverse chi-square potential from a ratio u is 1 - 1/u^2
    u = gaussian_ratio(0.3, p)
    assert gaussian_potential_closed_form(spec, 0.3, p) == pytest.approx(1.0 - 1.0 / u**2)
    with pytest.raises(InputError):
        gaussian_potential_closed_form(get_spec("total_variation"), 0.3, p)


def test_gaussian_params_validation():
    with pytest.raises(InputError):
        GaussianParams(mu1=0.0, sigma1=1.0, mu2=0.0, sigma2=1.0, grid_lo=-2.0, grid_hi=5.0)
    with pytest.raises(InputError):
        GaussianParams(mu1=0.0, sigma1=-1.0, mu2=0.0, sigma2=1.0, grid_lo=-5.0, grid_hi=5.0)
    with pytest.raises(InputError):
        GaussianParams(mu1=0.0, sigma1=1.0, mu2=0.0, sigma2=1.0, grid_lo=5.0, grid_hi=-5.0)
    with pytest.raises(InputError):
        GaussianParams(
            mu1=0.0, sigma1=1.0, mu2=0.0, sigma2=1.0, grid_lo=-5.0, grid_hi=5.0, grid_n=1
        )


def test_equal_inputs_give_zero_estimate():
    spec = get_spec("kl")
    mu = np.full(6, 1.0 / 6.0)
    res = estimate_divergence(spec, mu, mu, CFG)
    assert res.estimate <= 1e-6
    assert np.ptp(res.f) <= 1e-4


def test_estimate_is_a_lower_bound():
    for name in ("kl", "chi2", "squared_hellinger", "jensen_shannon"):
        spec = get_spec(name)
        mu, nu = categorical_pair(8, seed=11)
        res = estimate_divergence(spec, mu, nu, CFG)
        exact = exact_divergence(spec, DiscreteMeasure(mu), DiscreteMeasure(nu))
        assert res.estimate <= exact + 1e-6


def test_categorical_recovery_small_error():
    spec = get_spec("kl")
    mu, nu = categorical_pair(10, seed=3)
    err, res = categorical_recovery_error(spec, mu, nu, CFG)
    assert err <= 1e-6
    assert res.converged


def test_quotient_normalization_does_not_change_trajectory():
    spec = get_spec("chi2")
    mu, nu = categorical_pair(5, seed=7)
    cfg_on = AscentConfig(learning_rate=0.1, iterations=30, use_quotient=True, polish=False)
    cfg_off = AscentConfig(learning_rate=0.1, iterations=30, use_quotient=False, polish=False)
    a = estimate_divergence(spec, mu, nu, cfg_on, keep_history=True)
    b = estimate_divergence(spec, mu, nu, cfg_off, keep_history=True)
    assert np.allclose(a.history, b.history, atol=1e-10)


def test_trivial_generator_rejected():
    mu, nu = categorical_pair(4, seed=1)
    with pytest.raises(InputError):
        estimate_divergence(get_spec("trivial"), mu, nu, CFG)


def test_input_validation():
    spec = get_spec("kl")
    with pytest.raises(InputError):
        estimate_divergence(spec, np.array([0.5, 0.5]), np.array([0.3, 0.3, 0.4]), CFG)
    with pytest.raises(InputError):
        estimate_divergence(spec, np.array([0.7, 0.7]), np.array([0.5, 0.5]), CFG)
    with pytest.raises(InputError):
        AscentConfig(learning_rate=-0.1)
    with pytest.raises(InputError):
        AscentConfig(iterations=0)


def test_result_serializes():
    spec = get_spec("kl")
    mu, nu = categorical_pair(4, seed=2)
    d = estimate_divergence(spec, mu, nu, CFG).to_dict()
    assert set(d) == {"estimate", "f", "iterations", "converged"}


def test_equal_gaussians_experiment():
    spec = get_spec("kl")
    p = GaussianParams(
        mu1=0.0, sigma1=1.0, mu2=0.0, sigma2=1.0, grid_lo=-5.0, grid_hi=5.0, grid_n=128
    )
    report = gaussian_experiment(spec, p, CFG)
    assert report.converged
    assert report.aligned_sup_error <= 1e-3
    assert abs(report.estimate) <= 1e-6


def test_gaussian_report_csv(tmp_path):
    spec = get_spec("chi2")
    p = GaussianParams(
        mu1=0.0, sigma1=1.0, mu2=0.2, sigma2=1.1, grid_lo=-6.0, grid_hi=6.0, grid_n=64
    )
    report = gaussian_experiment(spec, p, CFG)
    path = tmp_path / "report.csv"
    report.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x,f_learned,f_closed"
    assert len(lines) == 65
    d = report.to_dict()
    assert set(d) == {
        "grid",
        "f_learned",
        "f_closed",
        "aligned_sup_error",
        "estimate",
        "converged",
        "message",
    }
