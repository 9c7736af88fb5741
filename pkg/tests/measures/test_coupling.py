import numpy as np
import pytest

from bassflow.common.errors import LPSizeExceeded, UnsupportedDimension
from bassflow.measures import (GaussianMarginal, dirac, mcov, mcov_lp,
                               parse_marginal, uniform, validate,
                               wasserstein2_1d)


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(7)


@pytest.fixture(scope="module")
def symmetric_pair():
    return uniform([-1.0, 1.0]), parse_marginal("uniform:-1,1")


def test_two_atoms_against_uniform(symmetric_pair):
    atoms, flat = symmetric_pair
    assert mcov(atoms, flat) == pytest.approx(0.5, abs=1e-14), "E[XY] under the comonotone coupling is 1/2"


def test_mcov_is_symmetric(symmetric_pair):
    atoms, flat = symmetric_pair
    assert mcov(atoms, flat) == mcov(flat, atoms), "mcov should not depend on argument order"


def test_dirac_at_zero_has_no_covariance():
    assert mcov(dirac(0.0), parse_marginal("gaussian:0,3")) == pytest.approx(0.0, abs=1e-14), \
        "E[0 * Y] vanishes"


def test_discrete_pair_is_sorted_sum():
    p, q = uniform([1.0, 2.0, 3.0]), uniform([3.0, 1.0, 2.0])
    assert mcov(p, q) == pytest.approx(14.0 / 3.0), "Comonotone pairing of equal clouds gives E[X^2]"


def test_comonotone_coupling_dominates_permutations(rng):
    x, y = rng.normal(size=8), rng.normal(size=8)
    best = mcov(uniform(x), uniform(y))
    for _ in range(50):
        assert float(np.mean(x * rng.permutation(y))) <= best + 1e-12, \
            "No permutation coupling should beat the maximal covariance"


def test_parametric_gaussian_pair():
    value = mcov(GaussianMarginal(0.0, 1.0), GaussianMarginal(0.0, np.sqrt(2.0)))
    assert value == pytest.approx(np.sqrt(2.0), abs=1e-8), "mcov(N(0,1), N(0,2)) = sqrt(2)"


def test_semi_discrete_gaussian_pair():
    atoms = GaussianMarginal(0.0, 1.0).discretize(200)
    value = mcov(atoms, GaussianMarginal(0.0, np.sqrt(2.0)))
    assert value == pytest.approx(np.sqrt(2.0), abs=1e-2), "Discretised source should be close to sqrt(2)"


def test_lp_agrees_on_the_line(rng):
    for _ in range(5):
        p = validate(rng.normal(size=5), rng.dirichlet(np.ones(5)), dim=1)
        q = validate(rng.normal(scale=2.0, size=6), rng.dirichlet(np.ones(6)), dim=1)
        assert mcov_lp(p, q) == pytest.approx(mcov(p, q), abs=1e-7), "LP and quantile formula should agree"


def test_assignment_in_two_dimensions(rng):
    points = rng.normal(size=(6, 2))
    cloud = uniform(points, dim=2)
    shuffled = uniform(points[rng.permutation(6)], dim=2)
    expected = float(np.mean(np.sum(points ** 2, axis=1)))
    assert mcov(cloud, shuffled) == pytest.approx(expected, abs=1e-12), "Identical clouds couple to themselves"


def test_lp_size_limit():
    big = uniform(np.zeros((513, 2)) + np.arange(513)[:, None], dim=2)
    small = uniform(np.eye(2), dim=2)
    with pytest.raises(LPSizeExceeded):
        mcov(big, small)


def test_parametric_input_in_two_dimensions():
    cloud = uniform(np.eye(2), dim=2)
    with pytest.raises(UnsupportedDimension):
        mcov(cloud, GaussianMarginal(0.0, 1.0))


def test_wasserstein_examples(symmetric_pair):
    atoms, flat = symmetric_pair
    assert wasserstein2_1d(atoms, flat) == pytest.approx(np.sqrt(1.0 / 3.0), abs=1e-12), \
        "W2(+-1, U[-1,1]) = sqrt(1/3)"
    assert wasserstein2_1d(uniform([0.0, 1.0]), uniform([1.0, 2.0])) == pytest.approx(1.0), \
        "A unit shift moves every atom by one"
    assert wasserstein2_1d(flat, flat) == pytest.approx(0.0, abs=1e-3), "Distance to itself vanishes"
