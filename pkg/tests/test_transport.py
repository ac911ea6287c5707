"""Wasserstein-1 primal LP, Kantorovich dual, Lipschitz norms."""

import numpy as np
import pytest

from myfdiv.errors import InputError
from myfdiv.measures import FiniteMetricSpace
from myfdiv.transport import kantorovich_dual, lipschitz_norm, w1_distance, w1_primal


def _line_space(points):
    return FiniteMetricSpace.from_points([[p] for p in points])


def test_two_point_transport_by_hand():
    space = _line_space([0.0, 2.0])
    mu = np.array([1.0, 0.0])
    nu = np.array([0.0, 1.0])
    plan = w1_primal(space, mu, nu)
    assert plan.cost == pytest.approx(2.0, abs=1e-12)
    assert plan.pi[0, 1] == pytest.approx(1.0, abs=1e-12)


def test_translation_on_a_line():
    # moving mass 0.5 a distance 1 costs 0.5
    space = _line_space([0.0, 1.0, 2.0])
    mu = np.array([0.5, 0.5, 0.0])
    nu = np.array([0.0, 0.5, 0.5])
    assert w1_distance(space, mu, nu) == pytest.approx(1.0, abs=1e-12)


def test_identical_measures_cost_zero():
    space = _line_space([0.0, 1.0, 5.0])
    mu = np.array([0.3, 0.3, 0.4])
    assert w1_distance(space, mu, mu) == pytest.approx(0.0, abs=1e-12)
    value, f = kantorovich_dual(space, mu, mu)
    assert value == 0.0
    assert np.all(f == 0.0)


def test_mass_mismatch_rejected():
    space = _line_space([0.0, 1.0])
    with pytest.raises(InputError):
        w1_primal(space, np.array([0.7, 0.7]), np.array([0.5, 0.5]))


def test_duality_and_lipschitz_on_random_spaces():
    for seed in range(15):
        rng = np.random.default_rng(100 + seed)
        w = rng.uniform(0.2, 2.0, size=(5, 5))
        space = FiniteMetricSpace.from_shortest_path(w)
        mu = rng.dirichlet(np.ones(5))
        nu = rng.dirichlet(np.ones(5))
        primal = w1_primal(space, mu, nu).cost
        dual, f = kantorovich_dual(space, mu, nu)
        assert abs(primal - dual) <= 1e-7
        assert lipschitz_norm(space, f) <= 1.0 + 1e-9
        assert f[0] == 0.0


def test_lipschitz_norm_values():
    space = _line_space([0.0, 1.0, 3.0])
    assert lipschitz_norm(space, np.array([0.0, 2.0, 2.0])) == pytest.approx(2.0)
    assert lipschitz_norm(space, np.zeros(3)) == 0.0
    with pytest.raises(InputError):
        lipschitz_norm(space, np.zeros(2))


def test_kr_formula_value_is_mean_difference_of_potential():
    rng = np.random.default_rng(77)
    space = _line_space([0.0, 0.7, 1.1, 2.0])
    mu = rng.dirichlet(np.ones(4))
    nu = rng.dirichlet(np.ones(4))
    value, f = kantorovich_dual(space, mu, nu)
    assert value == pytest.approx(float((mu - nu) @ f), abs=1e-12)
