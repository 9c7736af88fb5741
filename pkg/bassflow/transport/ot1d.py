import logging
from dataclasses import dataclass

import numpy as np

from bassflow.common.errors import DensityRequired
from bassflow.common.quadrature import QuadratureRule
from bassflow.measures.marginals import MarginalSpec
from bassflow.measures.smoothing import LOG_SQRT_2PI, SmoothedLaw

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BrenierMap1D:
    """
    The monotone map zeta -> Q_nu(F(zeta)) pushing the smoothed law beta = L(Z) * gamma_1 onto nu.

    Quantiles are read from whichever tail of F is more accurate, so the map stays resolved far into
    both tails; probabilities are clamped to [1e-16, 1 - 1e-16] before Q_nu.

    Attributes:
        source (SmoothedLaw): The smoothed law beta.
        target (MarginalSpec): The target marginal nu.
    """
    source: SmoothedLaw
    target: MarginalSpec

    def __call__(self, zeta) -> np.ndarray:
        return self.target.transport(*self.source.tails(zeta))

    def smoothed(self, z, rule: QuadratureRule, variance: float = 1.0) -> np.ndarray:
        """
        E[T(z + G)] with G ~ N(0, variance), by the given rule.
        """
        z = np.asarray(z, dtype=float)
        zeta = z[..., None] + rule.scaled(variance)
        return rule.expect(self(zeta))

    def hessian(self, x) -> np.ndarray:
        """
        T'(x) = Q_nu'(F(x)) f_beta(x), with the left derivative of Q_nu at kinks.

        Raises:
            DensityRequired: If nu has no density.
        """
        if not self.target.has_density:
            log.error(f"Hessian requested for {self.target.describe()}, which has no density.")
            raise DensityRequired(f"{self.target.describe()} has no density")
        x = np.asarray(x, dtype=float)
        slope = self.target.quantile_derivative(*self.source.tails(x))
        with np.errstate(invalid='ignore', over='ignore'):
            out = slope * self.source.density_eval(x)
        return np.nan_to_num(out, nan=0.0, posinf=0.0)


def brenier_eval(brenier: BrenierMap1D, zeta) -> np.ndarray:
    return brenier(zeta)


def smoothed_brenier_eval(brenier: BrenierMap1D, rule: QuadratureRule, z) -> np.ndarray:
    return brenier.smoothed(z, rule)


def hessian_eval(brenier: BrenierMap1D, x) -> np.ndarray:
    return brenier.hessian(x)


def hessian_lower_bound(R: float, nu: MarginalSpec, x) -> np.ndarray:
    """
    Lower bound phi(|x| + R) / sup(density of nu) for the Hessian of any Brenier map whose source atoms
    lie in [-R, R].

    Raises:
        DensityRequired: If nu has no density.
    """
    if not nu.has_density:
        log.error(f"Hessian lower bound needs a density; {nu.describe()} has none.")
        raise DensityRequired(f"{nu.describe()} has no density")
    sup_density = nu.density_bounds()[1]
    d = np.abs(np.asarray(x, dtype=float)) + R
    return np.exp(-0.5 * d * d - LOG_SQRT_2PI) / sup_density
