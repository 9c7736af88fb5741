from .certificates import (BoundCertificate, MonitorResult, bound_certificate,
                           boundedness_monitor, slice_mass, support_function)
from .config import (GRAD_TOLERANCE_MET, STEP_UNDERFLOW, T_MAX_REACHED,
                     FlowConfig)
from .diagnostics import RateEstimate, barycenter_drift, rate_estimate
from .integrator import (FlowTrace, GradientFlow, TraceRow, euler_step,
                         integrate)

__all__ = [
    FlowConfig, FlowTrace, TraceRow, GradientFlow, euler_step, integrate,
    GRAD_TOLERANCE_MET, T_MAX_REACHED, STEP_UNDERFLOW,
    RateEstimate, rate_estimate, barycenter_drift,
    BoundCertificate, MonitorResult, bound_certificate, boundedness_monitor, slice_mass, support_function,
]
