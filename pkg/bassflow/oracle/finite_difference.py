import logging
from typing import Optional

import numpy as np

from bassflow.common.errors import OracleError
from bassflow.common.quadrature import QuadratureRule
from bassflow.lifted.functional import bass_value
from bassflow.lifted.state import Direction, LiftedState
from bassflow.measures.marginals import MarginalSpec

log = logging.getLogger(__name__)

H_MIN: float = 1e-6
H_MAX: float = 1e-3
H_GRADIENT: float = 1e-5
H_SECOND: float = 1e-3


def _check_step(h: float):
    if not H_MIN <= h <= H_MAX:
        log.error(f"Finite-difference step {h} outside [{H_MIN}, {H_MAX}].")
        raise OracleError(f"Finite-difference step must lie in [{H_MIN}, {H_MAX}], got {h}")


def fd_gradient(s: LiftedState, nu: MarginalSpec, rule: Optional[QuadratureRule] = None,
                h: float = H_GRADIENT) -> Direction:
    """
    Central differences of V in each atom coordinate, divided by the atom weight to give the L2 gradient.
    """
    _check_step(h)
    rule = rule or QuadratureRule()
    out = np.empty_like(s.z)

    for i in range(len(s)):
        for j in range(s.dim):
            up, down = s.z.copy(), s.z.copy()
            up[i, j] += h
            down[i, j] -= h
            difference = bass_value(s.with_z(up), nu, rule) - bass_value(s.with_z(down), nu, rule)
            out[i, j] = difference / (2.0 * h * s.w[i])
    return Direction(out)


def fd_second(s: LiftedState, d: Direction, nu: MarginalSpec, rule: Optional[QuadratureRule] = None,
              h: float = H_SECOND) -> float:
    """
    (V(Z + h dZ) - 2 V(Z) + V(Z - h dZ)) / h^2.
    """
    _check_step(h)
    rule = rule or QuadratureRule()
    forward = bass_value(s.moved(d, h), nu, rule)
    centre = bass_value(s, nu, rule)
    backward = bass_value(s.moved(d, -h), nu, rule)
    return float((forward - 2.0 * centre + backward) / (h * h))
