import numpy as np
import pytest

from bassflow.flow import (GRAD_TOLERANCE_MET, FlowConfig, GradientFlow,
                           barycenter_drift)
from bassflow.lifted import LiftedState, SemiDiscreteBassFunctional
from bassflow.measures import (GaussianMarginal, moments, validate,
                               wasserstein2_1d)
from bassflow.pipelines import solve_state


def centred(m):
    return validate(m.values - float(m.weights @ m.values), m.weights, 1)


def whitened_cloud(n, variance, rng):
    points = rng.standard_normal((n, 2))
    points -= points.mean(axis=0)
    factor = np.linalg.cholesky(np.cov(points, rowvar=False, bias=True))
    return np.linalg.solve(factor, points.T).T * np.sqrt(variance)


@pytest.mark.slow
def test_gaussian_pair_from_identity():
    trace = solve_state(GaussianMarginal(0.0, 1.0), GaussianMarginal(0.0, np.sqrt(2.0)), n_atoms=200)
    assert trace.termination == GRAD_TOLERANCE_MET, "Default run should meet the gradient tolerance"
    assert 0.98 <= trace.final.value <= 1.02, "inf V = sqrt(2 - 1)"
    assert wasserstein2_1d(centred(trace.final_state.law()), GaussianMarginal(0.0, 1.0)) <= 0.05, \
        "Bass measure of the pair is N(0, 1)"
    assert barycenter_drift(trace) <= 1e-8, "Barycenter is conserved"


@pytest.mark.slow
def test_semidiscrete_flow_in_the_plane():
    rng = np.random.default_rng(11)
    mu = validate(whitened_cloud(64, 0.5, rng), np.full(64, 1.0 / 64), 2)
    nu = validate(whitened_cloud(400, 2.0, rng), np.full(400, 1.0 / 400), 2)

    functional = SemiDiscreteBassFunctional(nu, samples_per_atom=1024, seed=0)
    config = FlowConfig(step=0.2, t_max=20.0, tol_grad=1e-3, grad_window=20)
    trace = GradientFlow(functional, config).integrate(LiftedState.from_measure(mu))

    assert trace.termination == GRAD_TOLERANCE_MET, "The flow should settle within the horizon"
    assert min(trace.final.grad_norm, trace.averaged_grad_norm or np.inf) <= 1e-3, "Gradient tolerance met"
    assert trace.final.value < trace.rows[0].value, "The flow should descend"
    # componentwise Gaussian pair: Z* = sqrt(s^2 + 1) / sigma_1 X with s^2 = 1/3, sigma_1^2 = 2
    s = trace.final_state
    reference = np.sqrt(2.0 / 3.0) * s.x
    assert np.sqrt(s.w @ np.sum((s.z - reference) ** 2, axis=1)) <= 0.1, \
        "W2 to the image of mu under the closed-form Bass map"
    barycenter, _ = moments(s.law())
    assert np.allclose(barycenter, 0.0, atol=1e-2), "Barycenter stays near the origin"
