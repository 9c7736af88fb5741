import logging
from typing import Tuple, Union

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog
from scipy.special import ndtr

from bassflow.common.errors import (LPSizeExceeded, MeasureError,
                                    UnsupportedDimension)
from bassflow.measures.discrete import DiscreteMeasure
from bassflow.measures.marginals import MarginalSpec, as_marginal

log = logging.getLogger(__name__)

N_LP: int = 512
PARAMETRIC_ORDER: int = 256

Measure = Union[DiscreteMeasure, MarginalSpec]


def _merged_quantiles(p: DiscreteMeasure, q: DiscreteMeasure) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Split (0, 1) at every jump of either step quantile.

    Returns:
        Tuple of the interval lengths and the values of Q_p and Q_q on each interval.
    """
    p, q = p.sorted(), q.sorted()
    cp, cq = np.cumsum(p.weights), np.cumsum(q.weights)
    breaks = np.unique(np.concatenate([[0.0], cp[:-1], cq[:-1], [1.0]]))
    mid = 0.5 * (breaks[:-1] + breaks[1:])

    qp = p.values[np.minimum(np.searchsorted(cp, mid, side='left'), len(cp) - 1)]
    qq = q.values[np.minimum(np.searchsorted(cq, mid, side='left'), len(cq) - 1)]
    return np.diff(breaks), qp, qq


def _mcov_semi(discrete: DiscreteMeasure, parametric: MarginalSpec) -> float:
    ordered = discrete.sorted()
    breaks = np.concatenate([[0.0], np.cumsum(ordered.weights)])
    breaks[-1] = 1.0
    return float(ordered.values @ parametric.partial_means(breaks))


def _mcov_parametric(p: MarginalSpec, q: MarginalSpec) -> float:
    # integral of Q_p(u) Q_q(u) du with u = Phi(t), t ~ N(0, 1)
    nodes, weights = hermegauss(PARAMETRIC_ORDER)
    weights = weights / weights.sum()
    lower, upper = ndtr(nodes), ndtr(-nodes)
    return float(weights @ (p.transport(lower, upper) * q.transport(lower, upper)))


def mcov(p: Measure, q: Measure) -> float:
    """
    Maximal covariance sup over couplings of E<X, Y>.

    In one dimension the comonotone coupling is optimal, so the value is the integral of Q_p Q_q over (0, 1):
    summed exactly over merged quantile intervals when both sides are discrete, through closed-form partial
    means of the quantile when one side is parametric, and by Gauss-Hermite quadrature in probability space
    when both are. In d >= 2 both sides must be discrete and the assignment program is solved.

    Args:
        p (Measure): First measure.
        q (Measure): Second measure.

    Returns:
        float: The maximal covariance.

    Raises:
        UnsupportedDimension: For parametric input in d >= 2.
        LPSizeExceeded: For discrete input in d >= 2 with more than 512 atoms.
    """
    p, q = as_marginal(p), as_marginal(q)
    if p.dim != q.dim:
        log.error(f"Cannot couple dimensions {p.dim} and {q.dim}")
        raise UnsupportedDimension(f"Cannot couple dimensions {p.dim} and {q.dim}")

    if p.dim >= 2:
        if not (p.is_discrete and q.is_discrete):
            log.error("Maximal covariance in d >= 2 needs two discrete measures.")
            raise UnsupportedDimension("Maximal covariance in d >= 2 needs two discrete measures")
        return mcov_lp(p.measure, q.measure)

    if p.is_discrete and q.is_discrete:
        du, qp, qq = _merged_quantiles(p.measure, q.measure)
        return float(np.sum(du * qp * qq))
    if p.is_discrete:
        return _mcov_semi(p.measure, q)
    if q.is_discrete:
        return _mcov_semi(q.measure, p)
    return _mcov_parametric(p, q)


def mcov_lp(p: DiscreteMeasure, q: DiscreteMeasure, max_atoms: int = N_LP) -> float:
    """
    Maximal covariance between two discrete measures in any dimension, by linear programming.

    Equal-size clouds with uniform weights reduce to an assignment problem; otherwise the transport
    polytope is handed to HiGHS.
    """
    n, m = len(p), len(q)
    if max(n, m) > max_atoms:
        log.error(f"Assignment program with {n} x {m} atoms exceeds the limit of {max_atoms}.")
        raise LPSizeExceeded(f"Assignment program with {n} x {m} atoms exceeds the limit of {max_atoms}")

    gain = p.points @ q.points.T

    if n == m and np.allclose(p.weights, 1.0 / n) and np.allclose(q.weights, 1.0 / m):
        rows, cols = linear_sum_assignment(gain, maximize=True)
        return float(gain[rows, cols].mean())

    # pi is flattened row-major: pi[i, j] -> i * m + j
    row_sums = sparse.kron(sparse.identity(n), np.ones((1, m)))
    col_sums = sparse.kron(np.ones((1, n)), sparse.identity(m))
    result = linprog(
        c=-gain.ravel(),
        A_eq=sparse.vstack([row_sums, col_sums]).tocsr(),
        b_eq=np.concatenate([p.weights, q.weights]),
        bounds=(0, None),
        method='highs',
    )
    if not result.success:
        log.error(f"Assignment program failed: {result.message}")
        raise MeasureError(f"Assignment program failed: {result.message}")
    return float(-result.fun)


def wasserstein2_1d(p: Measure, q: Measure) -> float:
    """
    Quadratic Wasserstein distance on the line.
    """
    p, q = as_marginal(p), as_marginal(q)
    if p.is_discrete and q.is_discrete:
        du, qp, qq = _merged_quantiles(p.measure, q.measure)
        return float(np.sqrt(np.sum(du * (qp - qq) ** 2)))
    squared = p.second_moment() + q.second_moment() - 2.0 * mcov(p, q)
    return float(np.sqrt(max(squared, 0.0)))
