import logging

import numpy as np

from bassflow.common.errors import IdenticalStates
from bassflow.lifted.functional import BassFunctional
from bassflow.lifted.state import LiftedState
from bassflow.measures.coupling import mcov
from bassflow.measures.discrete import DiscreteMeasure

log = logging.getLogger(__name__)

SPLIT_TOL: float = 1e-14


def monotone_rearrange(s: LiftedState) -> LiftedState:
    """
    Re-pair the values of Z with the atoms of mu so that (X, Z) is comonotone, keeping the law of Z.

    With equal weights this is a permutation; ties in x keep their stable order. With unequal weights the
    cumulative weights of X and of Z are merged and atoms are split along the merged cuts, so the result
    lives on a refined base with the same law of X and the same law of Z.
    """
    if s.dim != 1:
        log.warning(f"Monotone rearrangement is not defined in d={s.dim}; state returned unchanged.")
        return s

    order = np.argsort(s.xv, kind='stable')
    z_order = np.argsort(s.zv, kind='stable')

    if np.allclose(s.w, s.w[0], rtol=0.0, atol=1e-15):
        z = np.empty(len(s))
        z[order] = s.zv[z_order]
        return s.with_z(z)

    cx = np.cumsum(s.w[order])
    cz = np.cumsum(s.w[z_order])
    cuts = np.unique(np.concatenate([[0.0], cx[:-1], cz[:-1], [1.0]]))
    cuts = cuts[np.concatenate([[True], np.diff(cuts) > SPLIT_TOL])]
    cuts[-1] = 1.0
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    ix = order[np.minimum(np.searchsorted(cx, mids), len(s) - 1)]
    iz = z_order[np.minimum(np.searchsorted(cz, mids), len(s) - 1)]
    log.info(f"Unequal weights: rearrangement splits {len(s)} atoms into {len(mids)}.")
    return LiftedState(x=s.x[ix], z=s.z[iz], w=np.diff(cuts), dim=s.dim)


def law_value(alpha: DiscreteMeasure, mu: DiscreteMeasure, functional: BassFunctional) -> float:
    """
    The Bass functional at law level, MCov(alpha * gamma_1, nu) - MCov(alpha, mu).
    """
    return functional.pushforward_term(alpha.values, alpha.weights) - mcov(alpha, mu)


def strong_convexity_gap(s0: LiftedState, s1: LiftedState, functional) -> float:
    """
    (V(Z1) - V(Z0) - <D V(Z0), Z1 - Z0>) / ||Z1 - Z0||^2, an empirical strong-convexity constant.

    Raises:
        IdenticalStates: If Z1 = Z0.
        BaseMismatch: If the states do not share (x, w).
    """
    s0.check_base(s1)
    step = s1.z - s0.z
    squared = float(s0.w @ np.sum(step ** 2, axis=1))
    if squared == 0.0:
        log.error("Strong-convexity gap needs two distinct states")
        raise IdenticalStates("Strong-convexity gap needs two distinct states")

    start = functional.evaluate(s0)
    gap = functional.value(s1) - start.value - float(s0.w @ np.sum(start.gradient.dz * step, axis=1))
    return gap / squared


def pl_ratio(s: LiftedState, v_star: float, eps_hat: float, functional) -> float:
    """
    (V(Z) - V*) 4 eps / ||D V(Z)||^2; the Polyak-Lojasiewicz inequality holds when this is at most one.
    """
    evaluation = functional.evaluate(s)
    excess = evaluation.value - v_star
    grad_sq = s.norm(evaluation.gradient) ** 2
    if grad_sq == 0.0:
        return 0.0 if excess <= 0.0 else np.inf
    return excess * 4.0 * eps_hat / grad_sq
