import numpy as np
import pytest

from bassflow.common.errors import MeanNotZero, ZeroDirection
from bassflow.lifted import (BassFunctional, Direction, LiftedState,
                             contraction_epsilon, contraction_factor,
                             hessian_convexity_constant,
                             strong_convexity_bound)
from bassflow.measures import GaussianMarginal, parse_marginal, uniform


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(2024)


@pytest.fixture(scope="module")
def unit_uniform():
    return parse_marginal("uniform:-1,1")


@pytest.fixture(scope="module")
def functional(unit_uniform):
    return BassFunctional(unit_uniform)


@pytest.fixture(scope="module")
def bounded_states(rng):
    base = uniform(np.linspace(-0.5, 0.5, 6))
    return [LiftedState.from_measure(base, z=rng.uniform(-1.0, 1.0, size=6)) for _ in range(10)]


def mean_zero(rng, n: int) -> Direction:
    d = rng.normal(size=n)
    return Direction(d - d.mean())


def test_constant_direction_has_no_curvature(functional, bounded_states):
    for s in bounded_states:
        assert abs(functional.hessian_quadratic_form(s, Direction(np.ones(len(s))))) < 1e-12, \
            "Translations are flat directions of V"


def test_hessian_of_gaussian_pair_from_constant_state():
    s = LiftedState.from_measure(uniform([-1.0, 1.0]), z=[0.0, 0.0])
    functional = BassFunctional(GaussianMarginal(0.0, np.sqrt(2.0)))
    form = functional.hessian_quadratic_form(s, Direction(np.array([-1.0, 1.0])))
    assert form == pytest.approx(np.sqrt(2.0), abs=1e-8), "T' = sqrt(2) and E[dZ | Z + G] = 0"


def test_tower_identity(functional, bounded_states, rng):
    for s in bounded_states:
        d = Direction(rng.normal(size=len(s)))
        conditional = functional.conditional_expectation(s, d, functional.nodes(s.zv))
        residual = s.w @ functional.rule.expect((d.values[:, None] - conditional) ** 2)
        total = s.w @ d.values ** 2 - s.w @ functional.rule.expect(conditional ** 2)
        assert residual == pytest.approx(total, abs=1e-9), "||dZ - E[dZ|.]||^2 = ||dZ||^2 - ||E[dZ|.]||^2"


def test_grad_time_derivative_matches_form(functional, bounded_states, rng):
    for s in bounded_states:
        d = Direction(rng.normal(size=len(s)))
        along = s.inner(functional.grad_time_derivative(s, d), d)
        assert along == pytest.approx(functional.hessian_quadratic_form(s, d), abs=1e-8), \
            "<d/dt D V, dZ> should equal the second derivative of V"


def test_contraction_of_constant_state(rng):
    s = LiftedState.from_measure(uniform([-1.0, 0.0, 1.0]), z=[0.2, 0.2, 0.2])
    assert contraction_factor(s, mean_zero(rng, 3)) == pytest.approx(0.0, abs=1e-14), \
        "Atoms that coincide cannot be told apart"


def test_contraction_of_separated_atoms():
    s = LiftedState.from_measure(uniform([-1.0, 1.0]), z=[-5.0, 5.0])
    factor = contraction_factor(s, Direction(np.array([-1.0, 1.0])))
    assert 0.9 < factor < 1.0, "Far-apart atoms are almost recovered from Z + G"


def test_contraction_of_close_atoms():
    s = LiftedState.from_measure(uniform([-1.0, 1.0]), z=[-0.1, 0.1])
    assert contraction_factor(s, Direction(np.array([-1.0, 1.0]))) < 0.05, \
        "Close atoms are almost indistinguishable"


def test_contraction_bound_holds(bounded_states, rng):
    bound = 1.0 - contraction_epsilon(1.0)
    for s in bounded_states:
        for _ in range(10):
            assert contraction_factor(s, mean_zero(rng, len(s))) <= bound + 1e-12, \
                "Contraction factor should respect 1 - eps(R)"


def test_contraction_rejects_bad_directions(bounded_states):
    s = bounded_states[0]
    with pytest.raises(MeanNotZero):
        contraction_factor(s, Direction(np.ones(len(s))))
    with pytest.raises(ZeroDirection):
        contraction_factor(s, Direction(np.zeros(len(s))))


def test_contraction_epsilon_monotone_in_radius():
    assert 0.0 < contraction_epsilon(1.0) < 1.0, "eps(1) is a proper fraction"
    assert contraction_epsilon(2.0) < contraction_epsilon(1.0), "Wider states contract less"
    assert contraction_epsilon(1e-8) == pytest.approx(1.0, abs=1e-6), "eps tends to one as R vanishes"
    assert contraction_epsilon(0.0) == 1.0, "A single point contracts completely"


def test_strong_convexity_bound(unit_uniform):
    hcc = hessian_convexity_constant(1.0, unit_uniform)
    assert hcc > 0.0, "Hessian lower bound is positive for a bounded density"
    assert strong_convexity_bound(1.0, unit_uniform) == pytest.approx(0.5 * hcc * contraction_epsilon(1.0)), \
        "eps = c_H eps_contraction / 2"
