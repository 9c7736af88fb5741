import numpy as np
import pytest

from bassflow.common.errors import DegenerateKernel, UnsupportedDimension
from bassflow.common.quadrature import QuadratureRule
from bassflow.lifted import (BassFunctional, Direction, LiftedState,
                             bass_value, conditional_expectation, gradient)
from bassflow.measures import (GaussianMarginal, dirac, parse_marginal,
                               uniform, validate)


@pytest.fixture(scope="module")
def unit_uniform():
    return parse_marginal("uniform:-1,1")


@pytest.fixture(scope="module")
def two_point_state():
    return LiftedState.from_measure(uniform([-1.0, 1.0]))


def constant_state(c: float) -> LiftedState:
    return LiftedState.from_measure(dirac(0.0), z=np.array([c]))


def test_dirac_against_standard_normal():
    value = bass_value(constant_state(0.0), GaussianMarginal(0.0, 1.0))
    assert value == pytest.approx(1.0, abs=1e-10), "V(0) = E[G^2] when T is the identity"


def test_value_is_translation_invariant(unit_uniform):
    assert bass_value(constant_state(0.3), unit_uniform) == pytest.approx(
        bass_value(constant_state(-0.5), unit_uniform), abs=1e-9), "Shifting Z should not change V"


def test_dirac_against_uniform_is_stationary(unit_uniform):
    grad = gradient(constant_state(0.4), unit_uniform)
    assert abs(grad.values[0]) < 1e-12, "E[T(c + G)] = 0 = x for a centred target"


def test_gaussian_pair_optimum():
    mu = GaussianMarginal(0.0, 1.0).discretize(200)
    s = LiftedState.from_measure(mu)
    functional = BassFunctional(GaussianMarginal(0.0, np.sqrt(2.0)))
    evaluation = functional.evaluate(s)
    assert evaluation.value == pytest.approx(1.0, abs=2e-2), "V at Z = X is sqrt(2 - 1) up to discretisation"
    assert s.norm(evaluation.gradient) < 1e-2, "Z = X is close to the Bass measure for the Gaussian pair"


def test_gaussian_pair_gradient_is_small_with_fine_atoms():
    s = LiftedState.from_measure(GaussianMarginal(0.0, 1.0).discretize(400))
    grad = gradient(s, GaussianMarginal(0.0, np.sqrt(2.0)))
    assert s.norm(grad) <= 3e-3, "The identity start is nearly stationary"


def test_evaluate_matches_value_and_gradient(unit_uniform):
    s = LiftedState.from_measure(validate([-0.5, 0.1, 0.4], [0.3, 0.3, 0.4], dim=1), z=[0.2, -0.3, 0.9])
    functional = BassFunctional(unit_uniform)
    evaluation = functional.evaluate(s)
    assert evaluation.value == functional.value(s), "Single-pass value should match value()"
    assert np.array_equal(evaluation.gradient.dz, functional.gradient(s).dz), "Single-pass gradient should match"


def test_gradient_has_the_barycenter_gap(unit_uniform):
    s = LiftedState.from_measure(uniform([-0.2, 0.0, 0.5]), z=[1.0, -1.0, 0.3])
    grad = gradient(s, unit_uniform)
    assert s.mean(grad)[0] == pytest.approx(0.0 - s.base().weights @ s.base().values, abs=1e-12), \
        "Mean of the gradient is bary(nu) - bary(mu)"


def test_conditional_expectation_examples(two_point_state):
    d = Direction(np.array([-1.0, 1.0]))
    assert conditional_expectation(two_point_state, d, 1.0) == pytest.approx(np.tanh(1.0), abs=1e-12), \
        "Posterior mean of +-1 given Z + G = 1"
    assert conditional_expectation(two_point_state, d, 0.0) == pytest.approx(0.0, abs=1e-15), \
        "Symmetric posterior at zero"


def test_conditional_expectation_of_constant_state():
    s = LiftedState.from_measure(validate([0.0, 1.0], [0.25, 0.75], dim=1), z=[0.3, 0.3])
    d = Direction(np.array([1.0, 3.0]))
    zeta = np.array([-4.0, 0.0, 7.0])
    assert np.allclose(conditional_expectation(s, d, zeta), 2.5, atol=1e-12), \
        "With a constant Z the posterior is the prior"


def test_conditional_expectation_far_in_the_tail(two_point_state):
    d = Direction(np.array([-1.0, 1.0]))
    assert conditional_expectation(two_point_state, d, 60.0) == pytest.approx(1.0), \
        "Log-space weights should stay finite far from the atoms"


def test_degenerate_kernel_is_reported(two_point_state):
    d = Direction(np.array([-1.0, 1.0]))
    with pytest.raises(DegenerateKernel):
        conditional_expectation(two_point_state, d, np.nan)


def test_closed_form_needs_the_line(unit_uniform):
    s = LiftedState.from_measure(uniform(np.eye(2), dim=2))
    with pytest.raises(UnsupportedDimension):
        BassFunctional(unit_uniform, QuadratureRule()).value(s)
