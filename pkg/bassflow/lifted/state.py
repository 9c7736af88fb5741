import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from bassflow.common.errors import BaseMismatch, DimensionMismatch
from bassflow.measures.discrete import DiscreteMeasure, validate

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Direction:
    """A perturbation dz of shape (n, dim), one vector per atom."""

    dz: np.ndarray

    def __post_init__(self):
        dz = np.array(self.dz, dtype=float)
        if dz.ndim == 1:
            dz = dz[:, None]
        if not np.all(np.isfinite(dz)):
            raise DimensionMismatch("Direction entries must be finite")
        object.__setattr__(self, 'dz', dz)

    def __len__(self) -> int:
        return len(self.dz)

    def __add__(self, other: 'Direction') -> 'Direction':
        return Direction(self.dz + other.dz)

    def __sub__(self, other: 'Direction') -> 'Direction':
        return Direction(self.dz - other.dz)

    def __mul__(self, scale: float) -> 'Direction':
        return Direction(self.dz * scale)

    __rmul__ = __mul__

    @property
    def values(self) -> np.ndarray:
        return self.dz[:, 0]


@dataclass(frozen=True, eq=False)
class LiftedState:
    """
    The coupled pair (X, Z): atom x_i of mu carries probability w_i and the value z_i of Z.

    The base (x, w) never changes along the flow; only z moves. Arrays are stored as (n, dim).

    Attributes:
        x (np.ndarray): Atoms of mu.
        z (np.ndarray): Values of Z on each atom.
        w (np.ndarray): Probabilities.
        dim (int): Ambient dimension.
    """
    x: np.ndarray
    z: np.ndarray
    w: np.ndarray
    dim: int

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(len(self.w), -1)
        z = np.array(self.z, dtype=float).reshape(len(self.w), -1)
        if x.shape != z.shape or x.shape[1] != self.dim:
            raise DimensionMismatch(f"State arrays disagree: x {x.shape}, z {z.shape}, dim {self.dim}")
        if not np.all(np.isfinite(z)):
            raise DimensionMismatch("State values must be finite")
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'z', z)
        object.__setattr__(self, 'w', np.asarray(self.w, dtype=float))

    def __len__(self) -> int:
        return len(self.w)

    @classmethod
    def from_measure(cls, mu: DiscreteMeasure, z: Optional[np.ndarray] = None) -> 'LiftedState':
        """
        Lift mu, starting from the comonotone identity Z = X unless z is given.
        """
        return cls(x=mu.points, z=mu.points if z is None else z, w=mu.weights, dim=mu.dim)

    def with_z(self, z: np.ndarray) -> 'LiftedState':
        return LiftedState(x=self.x, z=z, w=self.w, dim=self.dim)

    def moved(self, direction: Direction, h: float) -> 'LiftedState':
        return self.with_z(self.z + h * direction.dz)

    def base(self) -> DiscreteMeasure:
        return validate(self.x, self.w, self.dim)

    def law(self) -> DiscreteMeasure:
        """The law of Z, the candidate Bass measure."""
        return validate(self.z, self.w, self.dim)

    def check_base(self, other: 'LiftedState'):
        if len(self) != len(other) or not (np.array_equal(self.x, other.x) and np.array_equal(self.w, other.w)):
            raise BaseMismatch("States live on different (x, w) bases")

    def inner(self, a: Direction, b: Direction) -> float:
        """L2 inner product sum_i w_i <a_i, b_i>."""
        return float(self.w @ np.sum(a.dz * b.dz, axis=1))

    def norm(self, a: Direction) -> float:
        return float(np.sqrt(max(self.inner(a, a), 0.0)))

    def mean(self, a: Direction) -> np.ndarray:
        return self.w @ a.dz

    def barycenter(self) -> np.ndarray:
        return self.w @ self.z

    def second_moment(self) -> float:
        return float(self.w @ np.sum(self.z ** 2, axis=1))

    def max_abs_z(self) -> float:
        return float(np.max(np.linalg.norm(self.z, axis=1)))

    @property
    def xv(self) -> np.ndarray:
        return self.x[:, 0]

    @property
    def zv(self) -> np.ndarray:
        return self.z[:, 0]
