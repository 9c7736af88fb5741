import logging
from typing import Optional

import numpy as np

from bassflow.common.quadrature import QuadratureRule
from bassflow.measures.marginals import MarginalSpec
from bassflow.transport.ot1d import hessian_lower_bound

log = logging.getLogger(__name__)

GRID_POINTS: int = 256


def likelihood_ratio_floor(R: float, zeta) -> np.ndarray:
    """
    min over |y|, |y'| <= R of phi(zeta - y) / phi(zeta - y').
    """
    a = np.abs(np.asarray(zeta, dtype=float))
    return np.where(a <= R, np.exp(-0.5 * (a + R) ** 2), np.exp(-2.0 * R * a))


def contraction_epsilon(R: float, rule: Optional[QuadratureRule] = None, grid_points: int = GRID_POINTS) -> float:
    """
    Empirical contraction constant: the minimum over a grid of [-R, R] of E[g(z + G)], where g is the
    likelihood-ratio floor of the Gaussian kernel over atoms in [-R, R].

    Any mean-zero direction dZ on a state bounded by R satisfies ||E[dZ | Z + G]||^2 <= (1 - eps) ||dZ||^2.
    """
    rule = rule or QuadratureRule()
    if R <= 0:
        return 1.0
    z = np.linspace(-R, R, grid_points)
    smoothed = rule.expect(likelihood_ratio_floor(R, z[:, None] + rule.nodes[None, :]))
    return float(smoothed.min())


def hessian_convexity_constant(R: float, nu: MarginalSpec, rule: Optional[QuadratureRule] = None,
                               grid_points: int = GRID_POINTS) -> float:
    """
    inf over |zeta| <= R of the Gaussian smoothing of the Hessian lower bound, evaluated on a grid.
    """
    rule = rule or QuadratureRule()
    z = np.linspace(-R, R, grid_points) if R > 0 else np.zeros(1)
    smoothed = rule.expect(hessian_lower_bound(R, nu, z[:, None] + rule.nodes[None, :]))
    return float(smoothed.min())


def strong_convexity_bound(R: float, nu: MarginalSpec, rule: Optional[QuadratureRule] = None) -> float:
    """
    eps such that V is (2 eps)-strongly convex along mean-zero directions among states bounded by R.

    The implied exponential rates are at least 4 eps for V and 2 eps for Z.
    """
    eps = 0.5 * hessian_convexity_constant(R, nu, rule) * contraction_epsilon(R, rule)
    log.debug(f"Strong convexity bound at R={R}: {eps:.3e}.")
    return eps
