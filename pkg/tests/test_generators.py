"""Generator tables: values, derivative consistency, domain boundaries."""

import math

import numpy as np
import pytest

from myfdiv.errors import InputError
from myfdiv.generators import GENERATOR_NAMES, LEGENDRE_NAMES, get_spec

NEWTON = [n for n in GENERATOR_NAMES if get_spec(n).newton_applicable]


def test_generator_names_complete():
    assert list(GENERATOR_NAMES) == [
        "kl",
        "reverse_kl",
        "chi2",
        "reverse_chi2",
        "squared_hellinger",
        "jensen_shannon",
        "jeffreys",
        "triangular",
        "total_variation",
        "trivial",
    ]
    assert set(LEGENDRE_NAMES) == set(GENERATOR_NAMES) - {"total_variation", "trivial"}


def test_unknown_name_lists_valid_generators():
    with pytest.raises(InputError, match="kl"):
        get_spec("nope")


@pytest.mark.parametrize("name", GENERATOR_NAMES)
def test_phi_vanishes_at_one(name):
    spec = get_spec(name)
    assert spec.phi_plus(1.0) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("name", [n for n in GENERATOR_NAMES if n != "trivial"])
def test_phi_convex_on_samples(name):
    spec = get_spec(name)
    u = np.linspace(0.05, 4.0, 41)
    v = np.asarray(spec.phi_plus(u))
    # midpoint convexity on the sampled grid
    assert np.all(v[1:-1] <= 0.5 * (v[:-2] + v[2:]) + 1e-12)


def test_phi_at_zero_conventions():
    assert get_spec("kl").phi_plus(0.0) == pytest.approx(1.0)
    assert get_spec("chi2").phi_plus(0.0) == pytest.approx(1.0)
    assert get_spec("squared_hellinger").phi_plus(0.0) == pytest.approx(1.0)
    assert get_spec("triangular").phi_plus(0.0) == pytest.approx(1.0)
    assert get_spec("jensen_shannon").phi_plus(0.0) == pytest.approx(math.log(2.0))
    assert get_spec("total_variation").phi_plus(0.0) == pytest.approx(1.0)
    assert math.isinf(get_spec("reverse_kl").phi_plus(0.0))
    assert math.isinf(get_spec("reverse_chi2").phi_plus(0.0))
    assert math.isinf(get_spec("jeffreys").phi_plus(0.0))


def test_phi_negative_argument_is_infinite():
    for name in GENERATOR_NAMES:
        if name == "trivial":
            continue
        assert math.isinf(get_spec(name).phi_plus(-0.5))


def test_slopes_at_infinity():
    expected = {
        "kl": math.inf,
        "reverse_kl": 1.0,
        "chi2": math.inf,
        "reverse_chi2": 1.0,
        "squared_hellinger": 1.0,
        "jensen_shannon": math.log(2.0),
        "jeffreys": math.inf,
        "triangular": 1.0,
        "total_variation": 1.0,
    }
    for name, value in expected.items():
        assert get_spec(name).phi_prime_inf == pytest.approx(value)


@pytest.mark.parametrize("name", NEWTON)
def test_conjugate_derivatives_match_finite_differences(name):
    spec = get_spec(name)
    rng = np.random.default_rng(11)
    # sample strictly inside the conjugate domain of each generator
    upper = {
        "kl": 5.0,
        "reverse_kl": 0.9,
        "chi2": 5.0,
        "reverse_chi2": 0.9,
        "squared_hellinger": 0.9,
        "jensen_shannon": math.log(2.0) - 0.05,
        "jeffreys": 5.0,
        "triangular": 0.9,
    }[name]
    x = rng.uniform(-4.0, upper, size=200)
    h = 1e-6
    d1 = np.asarray(spec.phi_plus_conj_d1(x))
    d2 = np.asarray(spec.phi_plus_conj_d2(x))
    fd1 = (np.asarray(spec.phi_plus_conj(x + h)) - np.asarray(spec.phi_plus_conj(x - h))) / (2 * h)
    fd2 = (np.asarray(spec.phi_plus_conj_d1(x + h)) - np.asarray(spec.phi_plus_conj_d1(x - h))) / (
        2 * h
    )
    assert np.max(np.abs(d1 - fd1) / (1.0 + np.abs(fd1))) < 1e-7
    assert np.max(np.abs(d2 - fd2) / (1.0 + np.abs(fd2))) < 1e-6


@pytest.mark.parametrize("name", NEWTON)
def test_conjugate_by_direct_maximization(name):
    # phi_plus_conj(y) must equal sup_u (u*y - phi_plus(u)), checked on a grid
    spec = get_spec(name)
    u = np.linspace(1e-9, 60.0, 400000)
    phi = np.asarray(spec.phi_plus(u))
    for y in (-2.0, -0.5, 0.0, 0.3):
        brute = float(np.max(u * y - phi))
        exact = float(spec.phi_plus_conj(y))
        assert exact == pytest.approx(brute, abs=5e-4)


@pytest.mark.parametrize("name", LEGENDRE_NAMES)
def test_potential_from_ratio_inverts_conjugate_derivative(name):
    spec = get_spec(name)
    u = np.array([0.2, 0.7, 1.0, 1.8, 6.0])
    y = np.asarray(spec.potential_from_ratio(u))
    back = np.asarray(spec.phi_plus_conj_d1(y))
    assert np.allclose(back, u, rtol=1e-9, atol=1e-9)


def test_conjugate_domain_boundaries():
    chi2 = get_spec("chi2")
    # flat branch below the kink at -2, quadratic above
    assert chi2.phi_plus_conj(-3.0) == pytest.approx(-1.0)
    assert chi2.phi_plus_conj_d1(-3.0) == pytest.approx(0.0)
    assert chi2.phi_plus_conj(0.0) == pytest.approx(0.0)
    js = get_spec("jensen_shannon")
    assert math.isinf(js.phi_plus_conj(math.log(2.0) + 1e-6))
    assert np.isfinite(js.phi_plus_conj(math.log(2.0) - 1e-6))
    tri = get_spec("triangular")
    assert tri.phi_plus_conj(-4.0) == pytest.approx(-1.0)
    assert math.isinf(tri.phi_plus_conj(1.5))
    tv = get_spec("total_variation")
    assert tv.phi_plus_conj(-2.0) == pytest.approx(-1.0)
    assert tv.phi_plus_conj(0.5) == pytest.approx(0.5)
    assert math.isinf(tv.phi_plus_conj(1.5))


def test_jeffreys_conjugate_is_overflow_safe():
    spec = get_spec("jeffreys")
    # for very negative arguments the closed form needs W(e^t) with huge t
    val = float(spec.phi_plus_conj(-800.0))
    assert np.isfinite(val)
    # asymptotically phi_plus_conj(x) ~ x + W(e^{1-x}) + 1/W(e^{1-x}) - 2
    w = 801.0 - math.log(801.0)
    for _ in range(50):
        w = w - (w + math.log(w) - 801.0) * w / (w + 1.0)
    assert val == pytest.approx(-800.0 + w + 1.0 / w - 2.0, rel=1e-12)


def test_trivial_generator_flags():
    spec = get_spec("trivial")
    assert spec.is_trivial
    assert not spec.newton_applicable
