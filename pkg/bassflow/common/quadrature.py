import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from bassflow.common.errors import InvalidConfig

log = logging.getLogger(__name__)

DEFAULT_ORDER: int = 64


@dataclass(frozen=True)
class QuadratureRule:
    """
    Gauss-Hermite rule normalised against the standard normal density.

    Every expectation over the independent Gaussian increment is evaluated with one of these rules, so
    sum(weights * f(nodes)) approximates E[f(G)] for G ~ N(0, 1).

    Attributes:
        order (int): Number of nodes.
        nodes (np.ndarray): Symmetric nodes g_k.
        weights (np.ndarray): Positive weights summing to one.
    """
    order: int = DEFAULT_ORDER
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.order < 1:
            log.error(f"Quadrature order {self.order} is not positive.")
            raise InvalidConfig(f"Quadrature order must be positive, got {self.order}")

        nodes, weights = hermegauss(self.order)

        # Enforce exact symmetry so that the first moment vanishes to roundoff
        nodes = 0.5 * (nodes - nodes[::-1])
        weights = 0.5 * (weights + weights[::-1])
        weights = weights / weights.sum()

        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'weights', weights)
        log.debug(f"Built Gauss-Hermite rule of order {self.order}.")

    def scaled(self, variance: float) -> np.ndarray:
        """
        Nodes of the same rule for a centred Gaussian with the given variance.
        """
        return self.nodes * np.sqrt(variance)

    def expect(self, values: np.ndarray, axis: int = -1) -> np.ndarray:
        """
        Contract an array of integrand values evaluated at the nodes along `axis`.
        """
        return np.tensordot(values, self.weights, axes=([axis], [0]))
