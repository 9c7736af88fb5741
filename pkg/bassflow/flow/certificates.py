import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from bassflow.common.errors import (DeltaTooLarge, SupportNotCompact,
                                    SupportNotInterior, UnsupportedDimension)
from bassflow.flow.integrator import FlowTrace
from bassflow.measures.discrete import DiscreteMeasure
from bassflow.measures.marginals import MarginalSpec, as_marginal

log = logging.getLogger(__name__)

SPHERE_DIRECTIONS: int = 720
MONITOR_SLACK: float = 1e-9

Measure = Union[DiscreteMeasure, MarginalSpec]


@dataclass(frozen=True)
class BoundCertificate:
    """
    A-priori bound M on |Z_t| once the flow has entered the ball, from the slice geometry of nu.

    Attributes:
        L (float): max |y| over the support of nu.
        Delta (float): Smallest gap between a supporting hyperplane of nu and the support of mu.
        delta (float): Slice depth, 0 < delta < Delta.
        r (float): Radius holding all but eta(delta / 2) of the smoothed laws along the flow.
        M (float): The bound 2 (r + L)^2 / delta.
        eta_delta (float): Smallest slice mass eta(delta).
    """
    L: float
    Delta: float
    delta: float
    r: float
    M: float
    eta_delta: float

    def to_dict(self) -> dict:
        return {"L": self.L, "Delta": self.Delta, "delta": self.delta, "r": self.r, "M": self.M,
                "eta": self.eta_delta}


@dataclass(frozen=True)
class MonitorResult:
    violations: int
    max_abs_z: float

    def to_dict(self) -> dict:
        return {"violations": self.violations, "max_abs_z": self.max_abs_z}


def direction_grid(dim: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        angles = 2.0 * np.pi * np.arange(SPHERE_DIRECTIONS) / SPHERE_DIRECTIONS
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    log.error(f"Direction grids are defined for d <= 2, got {dim}")
    raise UnsupportedDimension(f"Direction grids are defined for d <= 2, got {dim}")


def support_function(nu: Measure, a) -> float:
    """
    l(a) = sup of <a, y> over the support of nu.

    Raises:
        SupportNotCompact: If the support is unbounded in direction a.
    """
    nu = as_marginal(nu)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if nu.dim >= 2:
        return float(np.max(nu.measure.points @ a))

    lo, hi = nu.support()
    value = a[0] * hi if a[0] > 0 else a[0] * lo
    if not np.isfinite(value):
        log.error(f"{nu.describe()} has unbounded support")
        raise SupportNotCompact(f"{nu.describe()} has unbounded support")
    return float(value)


def slice_mass(nu: Measure, a, delta: float) -> float:
    """
    nu(S_{a, delta}), the mass within delta of the supporting hyperplane in direction a.
    """
    nu = as_marginal(nu)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    level = support_function(nu, a) - delta

    if nu.is_discrete:
        projection = nu.measure.points @ a
        return float(nu.measure.weights @ (projection >= level))

    # continuous on the line: direction +1 reads the upper tail, -1 the lower tail
    if a[0] > 0:
        return float(nu.sf(np.array([level / a[0]]))[0])
    return float(nu.cdf(np.array([level / a[0]]))[0])


def bound_certificate(mu: Measure, nu: Measure, delta: float,
                      second_moment: Optional[float] = None) -> BoundCertificate:
    """
    Build the bound M from the geometry of (mu, nu).

    The radius r uses Chebyshev's inequality on the smoothed laws of the flow, whose second moments are at
    most `second_moment` + d (defaulting to the second moment of mu, the identity start).

    Args:
        mu (Measure): Discrete source marginal.
        nu (Measure): Compactly supported target.
        delta (float): Slice depth.
        second_moment (Optional[float]): Largest E|Z_t|^2 along the tracked family.

    Returns:
        BoundCertificate: The certificate.

    Raises:
        SupportNotCompact: If nu has unbounded support.
        SupportNotInterior: If supp mu touches the boundary of conv(supp nu).
        DeltaTooLarge: If delta is not in (0, Delta).
    """
    mu, nu = as_marginal(mu), as_marginal(nu)
    directions = direction_grid(nu.dim)

    if nu.dim >= 2:
        L = float(np.max(np.linalg.norm(nu.measure.points, axis=1)))
        mu_points = mu.measure.points
    else:
        lo, hi = nu.support()
        if not (np.isfinite(lo) and np.isfinite(hi)):
            log.error(f"Bound certificate needs compact support, got {nu.describe()}.")
            raise SupportNotCompact(f"{nu.describe()} has unbounded support")
        L = float(max(abs(lo), abs(hi)))
        mu_points = np.array([[v] for v in mu.support()])

    Delta = min(support_function(nu, a) - float(np.max(mu_points @ a)) for a in directions)
    if Delta <= 0:
        log.error(f"Support of mu is not interior to conv(supp nu): Delta={Delta}.")
        raise SupportNotInterior(f"Support of mu is not interior to conv(supp nu): Delta={Delta}")
    if not 0 < delta < Delta:
        log.error(f"Slice depth {delta} must lie in (0, {Delta})")
        raise DeltaTooLarge(f"Slice depth {delta} must lie in (0, {Delta})")

    eta_delta = min(slice_mass(nu, a, delta) for a in directions)
    eta_half = min(slice_mass(nu, a, 0.5 * delta) for a in directions)
    moment = mu.second_moment() if second_moment is None else second_moment
    r = float(np.sqrt((moment + nu.dim) / eta_half))
    M = 2.0 * (r + L) ** 2 / delta

    certificate = BoundCertificate(L=L, Delta=float(Delta), delta=delta, r=r, M=M, eta_delta=eta_delta)
    log.info(f"Bound certificate: L={L:.4g}, Delta={Delta:.4g}, eta={eta_delta:.4g}, r={r:.4g}, M={M:.4g}.")
    return certificate


def boundedness_monitor(trace: FlowTrace, cert: BoundCertificate) -> MonitorResult:
    """
    Count atom-steps that break the boundedness pattern: outside the ball |z| <= M an atom must move
    strictly inwards, and once inside it must stay inside.
    """
    norms = np.linalg.norm(trace.z_history, axis=2)
    if len(norms) < 2:
        return MonitorResult(violations=0, max_abs_z=float(norms.max()) if norms.size else 0.0)

    before, after = norms[:-1], norms[1:]
    outside = (before > cert.M) & (after >= before)
    escaped = (before <= cert.M) & (after > cert.M + MONITOR_SLACK)
    violations = int(outside.sum() + escaped.sum())
    if violations:
        log.warning(f"Boundedness monitor found {violations} violations of the bound M={cert.M:.4g}.")
    return MonitorResult(violations=violations, max_abs_z=float(norms.max()))
