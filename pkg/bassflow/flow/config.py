import logging
from dataclasses import asdict, dataclass

from bassflow.common.errors import InvalidConfig
from bassflow.common.quadrature import DEFAULT_ORDER

log = logging.getLogger(__name__)

GRAD_TOLERANCE_MET: str = "GradToleranceMet"
T_MAX_REACHED: str = "TMaxReached"
STEP_UNDERFLOW: str = "StepUnderflow"


@dataclass(frozen=True)
class FlowConfig:
    """
    Settings of the explicit Euler integrator with backtracking.

    Attributes:
        step (float): Initial and maximal step size h0.
        tol_grad (float): Stop once ||D V|| falls to this level.
        t_max (float): Time horizon.
        backtrack (float): Factor applied to h after a rejected step.
        grow (float): Factor applied to h after `grow_after` consecutive accepted steps, capped at h0.
        grow_after (int): Accepted steps between growth attempts.
        min_step (float): Step size below which the run stops with StepUnderflow.
        quad_order (int): Gauss-Hermite order.
        record_every (int): Record one trace row every this many accepted steps.
        descent_slack (float): Relative roundoff allowance on the descent test; zero demands strict descent.
        grad_window (int): With W > 1 the run also stops once the time-averaged gradient over the last W
            accepted steps, (Z_{k-W} - Z_k) / (t_k - t_{k-W}), meets tol_grad; 1 uses the current gradient only.
    """
    step: float = 0.1
    tol_grad: float = 1e-7
    t_max: float = 200.0
    backtrack: float = 0.5
    grow: float = 1.1
    grow_after: int = 10
    min_step: float = 1e-12
    quad_order: int = DEFAULT_ORDER
    record_every: int = 1
    descent_slack: float = 1e-13
    grad_window: int = 1

    def __post_init__(self):
        positive = {
            'step': self.step, 'tol_grad': self.tol_grad, 't_max': self.t_max, 'min_step': self.min_step,
            'quad_order': self.quad_order, 'record_every': self.record_every, 'grow_after': self.grow_after,
            'grad_window': self.grad_window,
        }
        for name, value in positive.items():
            if not value > 0:
                log.error(f"Flow setting {name} must be positive, got {value}.")
                raise InvalidConfig(f"Flow setting {name} must be positive, got {value}")
        if not 0.0 < self.backtrack < 1.0:
            log.error(f"Backtracking factor {self.backtrack} outside (0, 1).")
            raise InvalidConfig(f"Backtracking factor must lie in (0, 1), got {self.backtrack}")
        if self.grow < 1.0:
            log.error(f"Growth factor {self.grow} below 1.")
            raise InvalidConfig(f"Growth factor must be at least 1, got {self.grow}")
        if self.descent_slack < 0.0:
            log.error(f"Descent slack {self.descent_slack} is negative.")
            raise InvalidConfig(f"Descent slack must be non-negative, got {self.descent_slack}")

    def to_dict(self) -> dict:
        return asdict(self)
