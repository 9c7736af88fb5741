import numpy as np
import pytest

from bassflow.common.errors import OracleError
from bassflow.lifted import BassFunctional, Direction, LiftedState
from bassflow.measures import (GaussianMarginal, UniformMarginal, dirac,
                               uniform)
from bassflow.oracle import fd_gradient, fd_second

TARGETS = [GaussianMarginal(0.0, 1.5), UniformMarginal(-2.0, 2.0)]


def random_states(count, seed):
    rng = np.random.default_rng(seed)
    base = uniform(np.linspace(-1.0, 1.0, 6))
    return [LiftedState.from_measure(base, z=base.values + 0.5 * rng.standard_normal(6)) for _ in range(count)]


@pytest.fixture(scope="module")
def states():
    return random_states(10, seed=5)


@pytest.mark.parametrize("nu", TARGETS)
def test_fd_gradient_matches_analytic(states, nu):
    functional = BassFunctional(nu)
    for s in states:
        analytic = functional.gradient(s)
        numeric = fd_gradient(s, nu, functional.rule)
        assert s.norm(numeric - analytic) <= 1e-4 * s.norm(analytic), \
            "Central differences should reproduce E[T(z + G)] - x"


def test_fd_gradient_at_fixed_point():
    s = LiftedState.from_measure(dirac(0.0))
    assert s.norm(fd_gradient(s, GaussianMarginal(0.0, 1.0))) <= 1e-5, "delta_0 is stationary for nu = gamma_1"


@pytest.mark.parametrize("nu", TARGETS)
def test_fd_gradient_orthogonal_to_shifts(states, nu):
    ones = Direction(np.ones(6))
    for s in states:
        assert abs(s.inner(fd_gradient(s, nu), ones)) <= 1e-7, \
            "V is flat along translations when mu and nu share a barycenter"


@pytest.mark.parametrize("nu", TARGETS)
def test_fd_second_vanishes_on_constant_direction(states, nu):
    for s in states[:3]:
        assert fd_second(s, Direction(np.ones(6)), nu) == pytest.approx(0.0, abs=1e-6), \
            "Second difference along a translation is zero"


@pytest.mark.parametrize("nu", TARGETS)
def test_fd_second_matches_hessian_form(states, nu):
    functional = BassFunctional(nu)
    rng = np.random.default_rng(9)
    for s in states:
        d = Direction(rng.standard_normal(6))
        assert fd_second(s, d, nu, functional.rule) == pytest.approx(
            functional.hessian_quadratic_form(s, d), rel=1e-3), "Second differences should match the Hessian form"


def test_fd_second_is_nonnegative(states):
    rng = np.random.default_rng(10)
    for s in states:
        assert fd_second(s, Direction(rng.standard_normal(6)), TARGETS[0]) >= -1e-6, "V is convex"


@pytest.mark.parametrize("h", [1e-7, 1e-2])
def test_step_outside_range(states, h):
    with pytest.raises(OracleError):
        fd_gradient(states[0], TARGETS[0], h=h)
    with pytest.raises(OracleError):
        fd_second(states[0], Direction(np.ones(6)), TARGETS[0], h=h)
