import logging
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import linregress

from bassflow.common.errors import InsufficientTrace
from bassflow.flow.integrator import FlowTrace
from bassflow.lifted.state import LiftedState

log = logging.getLogger(__name__)

MIN_ROWS: int = 20
TAIL_FRACTION: float = 0.8
VALUE_FLOOR: float = 1e-12
DISTANCE_FLOOR: float = 1e-5


@dataclass(frozen=True)
class RateEstimate:
    """
    Exponential decay rates fitted on log(V_t - V*) and log ||Z_t - Z*||.

    Attributes:
        kappa_v (float): Decay rate of the value gap.
        kappa_z (float): Decay rate of the distance to the limit.
        r2_v (float): Coefficient of determination of the value fit.
        r2_z (float): Coefficient of determination of the distance fit.
        r2 (float): The smaller of the two.
    """
    kappa_v: float
    kappa_z: float
    r2_v: float
    r2_z: float
    r2: float

    def to_dict(self) -> dict:
        return asdict(self)


def rate_estimate(trace: FlowTrace, v_star: float, z_star: LiftedState,
                  tail_fraction: float = TAIL_FRACTION) -> RateEstimate:
    """
    Least-squares exponential rates over the last `tail_fraction` of the trace.

    Rows whose value gap or distance has already reached roundoff are left out of the respective fit.

    Raises:
        InsufficientTrace: If fewer than 20 usable rows remain for either fit.
    """
    start = int(np.floor(len(trace) * (1.0 - tail_fraction)))
    times = trace.times[start:]
    gaps = trace.values[start:] - v_star
    distances = np.sqrt(np.sum(z_star.w[None, :, None] * (trace.z_history[start:] - z_star.z[None]) ** 2,
                               axis=(1, 2)))

    use_v, use_z = gaps > VALUE_FLOOR, distances > DISTANCE_FLOOR
    if use_v.sum() < MIN_ROWS or use_z.sum() < MIN_ROWS:
        log.error(f"Rate fit needs {MIN_ROWS} rows, got {int(use_v.sum())} (value) and {int(use_z.sum())} (state).")
        raise InsufficientTrace(f"Rate fit needs at least {MIN_ROWS} rows above the roundoff floor")

    fit_v = linregress(times[use_v], np.log(gaps[use_v]))
    fit_z = linregress(times[use_z], np.log(distances[use_z]))
    r2_v, r2_z = fit_v.rvalue ** 2, fit_z.rvalue ** 2
    estimate = RateEstimate(kappa_v=float(-fit_v.slope), kappa_z=float(-fit_z.slope),
                            r2_v=float(r2_v), r2_z=float(r2_z), r2=float(min(r2_v, r2_z)))
    log.info(f"Fitted rates kappa_v={estimate.kappa_v:.4g}, kappa_z={estimate.kappa_z:.4g}, r2={estimate.r2:.4f}.")
    return estimate


def barycenter_drift(trace: FlowTrace) -> float:
    """
    max_t |bary(Z_t) - bary(Z_0)| in the max norm.
    """
    barycenters = trace.barycenters
    return float(np.max(np.abs(barycenters - barycenters[0]))) if len(barycenters) else 0.0
