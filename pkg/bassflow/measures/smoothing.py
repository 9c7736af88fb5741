import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import logsumexp, ndtr

from bassflow.common.errors import UnsupportedDimension
from bassflow.measures.discrete import DiscreteMeasure
from bassflow.measures.marginals import MixtureMarginal, gaussian_mixture

log = logging.getLogger(__name__)

# Largest (queries x centers) block materialised at once
CHUNK_ELEMENTS: int = 1 << 21
LOG_SQRT_2PI: float = 0.5 * np.log(2.0 * np.pi)
UPPER_TAIL: float = 0.99


@dataclass(frozen=True, eq=False)
class SmoothedLaw:
    """
    The law of Z + G with Z ~ sum_i w_i delta_{z_i} and G ~ N(0, I) independent.

    In one dimension the cdf F(zeta) = sum_i w_i Phi(zeta - z_i), the survival function and the density are
    evaluated in closed form, in blocks so that large query sets never build the full kernel matrix.

    Attributes:
        centers (np.ndarray): Array of shape (n, dim).
        weights (np.ndarray): Probabilities of shape (n,).
        dim (int): Ambient dimension.
    """
    centers: np.ndarray
    weights: np.ndarray
    dim: int

    def _line(self) -> np.ndarray:
        if self.dim != 1:
            log.error(f"Closed-form evaluation needs dim=1, got {self.dim}")
            raise UnsupportedDimension(f"Closed-form evaluation needs dim=1, got {self.dim}")
        return self.centers[:, 0]

    def _reduce(self, zeta, kernel) -> np.ndarray:
        z = self._line()
        zeta = np.asarray(zeta, dtype=float)
        flat = zeta.reshape(-1)
        out = np.empty_like(flat)
        step = max(1, CHUNK_ELEMENTS // len(z))
        for start in range(0, len(flat), step):
            block = flat[start:start + step]
            out[start:start + step] = kernel(block[:, None] - z[None, :]) @ self.weights
        return out.reshape(zeta.shape)

    def cdf_eval(self, zeta) -> np.ndarray:
        return self._reduce(zeta, ndtr)

    def sf_eval(self, zeta) -> np.ndarray:
        return self._reduce(zeta, lambda d: ndtr(-d))

    def tails(self, zeta) -> Tuple[np.ndarray, np.ndarray]:
        """
        F(zeta) and 1 - F(zeta), the second summed directly wherever 1 - F would lose relative precision.
        """
        zeta = np.asarray(zeta, dtype=float)
        flat = zeta.reshape(-1)
        cdf = self.cdf_eval(flat)
        sf = 1.0 - cdf
        upper = cdf > UPPER_TAIL
        if np.any(upper):
            sf[upper] = self.sf_eval(flat[upper])
        return cdf.reshape(zeta.shape), sf.reshape(zeta.shape)

    def density_eval(self, zeta) -> np.ndarray:
        return self._reduce(zeta, lambda d: np.exp(-0.5 * d * d - LOG_SQRT_2PI))

    def log_kernel(self, zeta) -> np.ndarray:
        """
        Unnormalised log posterior weights log w_i - (zeta - z_i)^2 / 2 of the atoms given Z + G = zeta.

        Args:
            zeta (np.ndarray): Query points of any shape.

        Returns:
            np.ndarray: Array of shape zeta.shape + (n,).
        """
        z = self._line()
        zeta = np.asarray(zeta, dtype=float)
        d = zeta[..., None] - z
        return np.log(self.weights) - 0.5 * d * d

    def log_density_eval(self, zeta) -> np.ndarray:
        return logsumexp(self.log_kernel(zeta), axis=-1) - LOG_SQRT_2PI

    def mean(self) -> np.ndarray:
        return self.weights @ self.centers

    def second_moment(self) -> float:
        return float(self.weights @ np.sum(self.centers ** 2, axis=1)) + self.dim

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        index = rng.choice(len(self.weights), size=n, p=self.weights)
        return self.centers[index] + rng.standard_normal((n, self.dim))

    def as_marginal(self) -> MixtureMarginal:
        return gaussian_mixture(self._line(), self.weights)


def gaussian_smooth(m: DiscreteMeasure) -> SmoothedLaw:
    """
    Convolve a discrete measure with the standard Gaussian kernel.
    """
    return SmoothedLaw(centers=m.points, weights=m.weights, dim=m.dim)


def cdf_eval(law: SmoothedLaw, zeta) -> np.ndarray:
    return law.cdf_eval(zeta)
