import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from bassflow.common.errors import (DimensionMismatch, NonPositiveWeight,
                                    WeightSumMismatch)

log = logging.getLogger(__name__)

RENORMALISE_TOL: float = 1e-9


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """
    A weighted particle cloud in R^d.

    Attributes:
        points (np.ndarray): Array of shape (n, dim).
        weights (np.ndarray): Strictly positive probabilities of shape (n,) summing to one.
        dim (int): Ambient dimension.
    """
    points: np.ndarray
    weights: np.ndarray
    dim: int

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def values(self) -> np.ndarray:
        """
        One-dimensional view of the atoms (only meaningful for dim == 1).
        """
        return self.points[:, 0]

    def sorted(self) -> 'DiscreteMeasure':
        """
        Return the same 1-D measure with atoms in nondecreasing order.
        """
        order = np.argsort(self.values, kind='stable')
        return DiscreteMeasure(points=self.points[order], weights=self.weights[order], dim=self.dim)

    def moments(self) -> Tuple[np.ndarray, float]:
        return moments(self)


def validate(points: Sequence, weights: Sequence, dim: int) -> DiscreteMeasure:
    """
    Build an invariant-checked discrete measure.

    Weights that miss a total of one by less than 1e-9 are renormalised; larger mismatches are errors.

    Args:
        points (Sequence): n points, either scalars (dim == 1) or length-dim vectors.
        weights (Sequence): n probabilities.
        dim (int): Ambient dimension.

    Returns:
        DiscreteMeasure: The validated measure.

    Raises:
        DimensionMismatch: On shape disagreement or non-finite coordinates.
        NonPositiveWeight: If any weight is not strictly positive.
        WeightSumMismatch: If the weights sum away from one by at least 1e-9.
    """
    if dim < 1:
        raise DimensionMismatch(f"Dimension must be positive, got {dim}")

    points = np.array(points, dtype=float)
    weights = np.array(weights, dtype=float).reshape(-1)

    if points.ndim == 1 and dim == 1:
        points = points.reshape(-1, 1)
    if points.ndim != 2 or points.shape[1] != dim:
        raise DimensionMismatch(f"Expected points of shape (n, {dim}), got {points.shape}")
    if len(points) != len(weights) or len(points) == 0:
        raise DimensionMismatch(f"Got {len(points)} points and {len(weights)} weights")
    if not (np.all(np.isfinite(points)) and np.all(np.isfinite(weights))):
        raise DimensionMismatch("Points and weights must be finite")

    if np.any(weights <= 0):
        log.error(f"Found {int(np.sum(weights <= 0))} non-positive weights.")
        raise NonPositiveWeight("All weights must be strictly positive")

    total = weights.sum()
    if abs(total - 1.0) >= RENORMALISE_TOL:
        log.error(f"Weights sum to {total}.")
        raise WeightSumMismatch(f"Weights sum to {total}, expected 1")
    if total != 1.0:
        weights = weights / total

    points.setflags(write=False)
    weights.setflags(write=False)
    return DiscreteMeasure(points=points, weights=weights, dim=dim)


def uniform(points: Sequence, dim: int = 1) -> DiscreteMeasure:
    """
    Equal-weight measure on the given atoms.
    """
    points = np.asarray(points, dtype=float)
    return validate(points, np.full(len(points), 1.0 / len(points)), dim)


def dirac(x: float) -> DiscreteMeasure:
    return validate([x], [1.0], 1)


def moments(m: DiscreteMeasure) -> Tuple[np.ndarray, float]:
    """
    Barycenter and second moment of a discrete measure.

    Args:
        m (DiscreteMeasure): A validated measure.

    Returns:
        Tuple[np.ndarray, float]: The barycenter (shape (dim,)) and E|X|^2.
    """
    barycenter = m.weights @ m.points
    second_moment = float(m.weights @ np.sum(m.points ** 2, axis=1))
    return barycenter, second_moment
