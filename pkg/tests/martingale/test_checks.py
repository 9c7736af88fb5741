import numpy as np
import pytest

from bassflow.common.errors import (MartingaleError, TimeNotOnGrid,
                                    TooFewPaths)
from bassflow.martingale import (MartingalePaths, MartingaleVerdict,
                                 default_grid, duality_gap, marginal_check,
                                 martingale_check, mt_value)
from bassflow.measures import GaussianMarginal, dirac, uniform


@pytest.fixture(scope="module")
def brownian_paths():
    rng = np.random.default_rng(17)
    grid = default_grid()
    increments = rng.standard_normal((20_000, len(grid) - 1)) * np.sqrt(np.diff(grid))
    B = np.concatenate([np.zeros((20_000, 1)), np.cumsum(increments, axis=1)], axis=1)
    return MartingalePaths(grid=grid, M=B.copy(), B=B, seed=17)


def test_constant_paths_have_no_residual():
    grid = default_grid()
    M = np.repeat(np.linspace(-1.0, 1.0, 10_000)[:, None], len(grid), axis=1)
    verdict = martingale_check(MartingalePaths(grid=grid, M=M, B=M, seed=0), [(0.0, 0.5), (0.5, 1.0)])
    assert verdict.residual == 0.0, "Constant paths have zero increments"
    assert verdict.passed, "Zero residual passes"


def test_brownian_motion_is_a_martingale(brownian_paths):
    verdict = martingale_check(brownian_paths, [(0.0, 0.5), (0.5, 1.0)])
    assert verdict.passed, "Brownian increments should average out in every bin"


def test_squared_brownian_motion_is_not(brownian_paths):
    squared = MartingalePaths(grid=brownian_paths.grid, M=brownian_paths.B ** 2, B=brownian_paths.B, seed=17)
    verdict = martingale_check(squared, [(0.0, 0.5), (0.5, 1.0)])
    assert not verdict.passed, "B_t^2 drifts upward at rate one"
    assert verdict.residual > 0.4, "Mean increment of B^2 over half a unit is 1/2"


def test_too_few_paths():
    grid = default_grid()
    paths = MartingalePaths(grid=grid, M=np.zeros((100, len(grid))), B=np.zeros((100, len(grid))), seed=0)
    with pytest.raises(TooFewPaths):
        martingale_check(paths, [(0.0, 1.0)])


def test_pairs_must_be_ordered(brownian_paths):
    with pytest.raises(MartingaleError):
        martingale_check(brownian_paths, [(0.5, 0.5)])


def test_time_not_on_grid(brownian_paths):
    with pytest.raises(TimeNotOnGrid):
        brownian_paths.at(0.55)


def test_marginal_check_against_gaussian(brownian_paths):
    verdict = marginal_check(brownian_paths, 1.0, GaussianMarginal(0.0, 1.0))
    assert verdict.passed, "B_1 follows N(0, 1)"
    assert verdict.ks_bound == pytest.approx(1.63 / np.sqrt(20_000)), "Critical value scales with 1/sqrt(n)"
    assert verdict.w2 < 0.05, "Empirical law should be close in W2"


def test_marginal_check_against_wrong_target(brownian_paths):
    assert marginal_check(brownian_paths, 0.0, GaussianMarginal(0.0, 1.0)).ks == pytest.approx(0.5), \
        "A point mass at zero is half a unit away from Phi in KS"
    assert not marginal_check(brownian_paths, 1.0, GaussianMarginal(0.0, 2.0)).passed, \
        "N(0, 1) samples should fail against N(0, 4)"


def test_marginal_check_against_discrete_target(brownian_paths):
    assert marginal_check(brownian_paths, 0.0, dirac(0.0)).ks == pytest.approx(0.0), \
        "All paths start at the atom"
    assert marginal_check(brownian_paths, 0.0, uniform([-1.0, 0.0])).ks == pytest.approx(0.5), \
        "Half the target mass sits below the start"


def test_mt_value_of_gaussian_pair():
    mu, nu = GaussianMarginal(0.0, 1.0), GaussianMarginal(0.0, np.sqrt(2.0))
    assert mt_value(1.0, mu, nu) == pytest.approx(0.0, abs=1e-12), "-2 + 2 - 1 + 1 vanishes"


def test_duality_of_brownian_identity(brownian_paths):
    gap = duality_gap(brownian_paths, 1.0, dirac(0.0), GaussianMarginal(0.0, 1.0))
    assert gap.p_hat == pytest.approx(np.mean(brownian_paths.B[:, -1] ** 2)), "E[M_1 B_1 - M_0 B_0] with M = B"
    assert gap.passed, "E[B_1^2] = 1 within three standard errors"
    assert gap.mt_hat == pytest.approx(-2.0 * gap.p_hat + 1.0 - 0.0 + 1.0), "MBB cost from the estimate"


def test_martingale_verdict_allows_three_standard_errors():
    assert MartingaleVerdict(residual=3.0e-3, se=1e-3, z_max=3.0).passed, "Three bin errors is the limit"
    assert not MartingaleVerdict(residual=3.1e-3, se=1e-3, z_max=3.1).passed, "Beyond three bin errors fails"
