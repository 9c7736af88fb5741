import logging
from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np

from bassflow.common.errors import NotInConvexOrder
from bassflow.measures.discrete import DiscreteMeasure
from bassflow.measures.marginals import MarginalSpec, as_marginal

log = logging.getLogger(__name__)

GRID_POINTS: int = 1024
MEAN_TOL: float = 1e-9
STRICT_TOL: float = 1e-12
ENLARGEMENT: float = 1e-6

Measure = Union[DiscreteMeasure, MarginalSpec]


@dataclass(frozen=True)
class ConvexOrderResult:
    """
    Outcome of the potential-function comparison.

    Attributes:
        status (str): 'ordered', 'not_ordered' or 'unknown' (d >= 2, never decided).
        ordered (Optional[bool]): The verdict, None when unknown.
        witness (Optional[float]): First grid point, in ascending order, where u_mu exceeds u_nu.
        mean_gap (float): |bary(mu) - bary(nu)|.
        max_violation (float): Largest u_mu - u_nu over the grid.
    """
    status: str
    ordered: Optional[bool]
    witness: Optional[float] = None
    mean_gap: float = 0.0
    max_violation: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class IrreducibilityResult:
    irreducible: Optional[bool]
    reason: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def potential(m: Measure, x) -> np.ndarray:
    """
    The potential function u_m(x) = E|x - Y|, Y ~ m.
    """
    return as_marginal(m).potential(x)


def _grid(mu: MarginalSpec, nu: MarginalSpec) -> np.ndarray:
    lo_mu, hi_mu = mu.effective_support()
    lo_nu, hi_nu = nu.effective_support()
    lo, hi = min(lo_mu, lo_nu), max(hi_mu, hi_nu)
    return np.unique(np.concatenate([mu.knots(), nu.knots(), np.linspace(lo, hi, GRID_POINTS)]))


def convex_order_check_1d(mu: Measure, nu: Measure, slack: float = STRICT_TOL) -> ConvexOrderResult:
    """
    Decide mu <=cx nu on the line by comparing potential functions on a merged grid.

    The grid holds the atoms of mu, the atoms or knots of nu and 1024 uniform points over the joint support.

    Args:
        mu (Measure): Source marginal.
        nu (Measure): Target marginal.
        slack (float): Allowed excess of u_mu over u_nu.

    Returns:
        ConvexOrderResult: The verdict with a witness when not ordered.
    """
    mu, nu = as_marginal(mu), as_marginal(nu)
    if mu.dim >= 2 or nu.dim >= 2:
        log.warning("Convex order is not decided in d >= 2; proceeding without a verdict.")
        return ConvexOrderResult(status='unknown', ordered=None)

    mean_gap = abs(mu.mean() - nu.mean())
    grid = _grid(mu, nu)
    excess = mu.potential(grid) - nu.potential(grid)
    violating = np.flatnonzero(excess > slack)

    witness = float(grid[violating[0]]) if len(violating) else None
    ordered = mean_gap <= MEAN_TOL and witness is None
    if not ordered:
        log.info(f"Convex order fails: mean gap {mean_gap:.3e}, witness {witness}.")

    return ConvexOrderResult(
        status='ordered' if ordered else 'not_ordered',
        ordered=ordered,
        witness=witness,
        mean_gap=float(mean_gap),
        max_violation=float(excess.max()),
    )


def irreducibility_check_1d(mu: Measure, nu: Measure, slack: float = STRICT_TOL,
                            enlargement: float = ENLARGEMENT) -> IrreducibilityResult:
    """
    One-dimensional irreducibility: the potentials separate strictly around the support of mu and that
    support sits in the interior of the convex hull of the support of nu.

    Raises:
        NotInConvexOrder: If the pair is not in convex order.
    """
    mu, nu = as_marginal(mu), as_marginal(nu)
    order = convex_order_check_1d(mu, nu, slack=slack)
    if order.status == 'unknown':
        log.warning("Irreducibility is not decided in d >= 2; treating it as an unverified hypothesis.")
        return IrreducibilityResult(irreducible=None, reason="unverified in d >= 2")
    if not order.ordered:
        log.error(f"Pair is not in convex order (witness {order.witness}).")
        raise NotInConvexOrder("Pair is not in convex order", witness=order.witness)

    a, b = mu.support()
    lo, hi = nu.support()
    if not (lo < a and b < hi):
        return IrreducibilityResult(irreducible=False, reason="support of mu touches the boundary of conv(supp nu)")

    grid = _grid(mu, nu)
    inside = (grid > lo) & (grid < hi) & (grid >= a - enlargement) & (grid <= b + enlargement)
    points = grid[inside]
    separated = mu.potential(points) < nu.potential(points) - STRICT_TOL
    if not np.all(separated):
        touch = float(points[~separated][0])
        return IrreducibilityResult(irreducible=False, reason=f"potentials touch at {touch!r}")
    return IrreducibilityResult(irreducible=True)


@dataclass(frozen=True)
class AssumptionReport:
    """
    Standing hypotheses of the convergence theory, checked on the line.

    Attributes:
        convex_order (Optional[bool]): mu <=cx nu.
        irreducible (Optional[bool]): The pair is irreducible.
        compact_support (bool): nu has compact support.
        interior_support (bool): supp mu lies in the interior of conv(supp nu).
        density_lower (bool): nu has a density bounded away from zero on its support.
        density_upper (bool): nu has a bounded density.
    """
    convex_order: Optional[bool]
    irreducible: Optional[bool]
    compact_support: bool
    interior_support: bool
    density_lower: bool
    density_upper: bool

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def second_order_ready(self) -> bool:
        return bool(self.convex_order and self.irreducible and self.compact_support and self.interior_support
                    and self.density_lower and self.density_upper)


def assumption_report(mu: Measure, nu: Measure, slack: float = STRICT_TOL) -> AssumptionReport:
    mu, nu = as_marginal(mu), as_marginal(nu)
    if mu.dim >= 2:
        log.warning("Standing hypotheses are not checked in d >= 2.")
        return AssumptionReport(None, None, False, False, False, False)

    order = convex_order_check_1d(mu, nu, slack=slack)
    irreducible = irreducibility_check_1d(mu, nu, slack=slack).irreducible if order.ordered else None

    lo, hi = nu.support()
    a, b = mu.support()
    compact = bool(np.isfinite(lo) and np.isfinite(hi))
    interior = bool(lo < a and b < hi)

    if nu.has_density:
        inf_density, sup_density = nu.density_bounds()
        density_lower, density_upper = bool(inf_density > 0), bool(np.isfinite(sup_density))
    else:
        density_lower = density_upper = False

    report = AssumptionReport(order.ordered, irreducible, compact, interior, density_lower, density_upper)
    for name, held in report.to_dict().items():
        if name != 'convex_order' and not held:
            log.warning(f"Hypothesis '{name}' does not hold for ({mu.describe()}, {nu.describe()}).")
    return report
