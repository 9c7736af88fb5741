import logging
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from bassflow.flow.config import (GRAD_TOLERANCE_MET, STEP_UNDERFLOW,
                                  T_MAX_REACHED, FlowConfig)
from bassflow.lifted.functional import Evaluation
from bassflow.lifted.state import Direction, LiftedState

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TraceRow:
    t: float
    value: float
    grad_norm: float
    barycenter: np.ndarray
    max_abs_z: float
    h: float
    second_moment: float
    z: np.ndarray
    comonotone: Optional[bool] = None


@dataclass(eq=False)
class FlowTrace:
    """
    The recorded curve of the integrated flow.

    Rows are appended while integrating; once `termination` is set the trace is complete and is not
    modified further.

    Attributes:
        rows (List[TraceRow]): Recorded rows, t strictly increasing.
        final_state (Optional[LiftedState]): The last state reached.
        termination (Optional[str]): GradToleranceMet, TMaxReached or StepUnderflow.
        averaged_grad_norm (Optional[float]): Norm of the time-averaged gradient over the last
            `grad_window` accepted steps at termination; None when the window is 1 or not yet filled.
    """
    rows: List[TraceRow] = field(default_factory=list)
    final_state: Optional[LiftedState] = None
    termination: Optional[str] = None
    averaged_grad_norm: Optional[float] = None

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def times(self) -> np.ndarray:
        return np.array([row.t for row in self.rows])

    @property
    def values(self) -> np.ndarray:
        return np.array([row.value for row in self.rows])

    @property
    def grad_norms(self) -> np.ndarray:
        return np.array([row.grad_norm for row in self.rows])

    @property
    def barycenters(self) -> np.ndarray:
        return np.array([row.barycenter for row in self.rows])

    @property
    def z_history(self) -> np.ndarray:
        """Array of shape (rows, n, dim)."""
        return np.array([row.z for row in self.rows])

    @property
    def second_moments(self) -> np.ndarray:
        return np.array([row.second_moment for row in self.rows])

    @property
    def final(self) -> TraceRow:
        return self.rows[-1]

    def to_frame(self) -> pd.DataFrame:
        dim = len(self.rows[0].barycenter) if self.rows else 1
        data = {
            't': self.times,
            'V': self.values,
            'grad_norm': self.grad_norms,
            **{f'bary_{i + 1}': self.barycenters[:, i] for i in range(dim)},
            'max_abs_z': [row.max_abs_z for row in self.rows],
            'h': [row.h for row in self.rows],
        }
        return pd.DataFrame(data)


def is_comonotone(s: LiftedState) -> Optional[bool]:
    if s.dim != 1:
        return None
    order = np.lexsort((s.zv, s.xv))
    return bool(np.all(np.diff(s.zv[order]) >= 0.0))


def euler_step(s: LiftedState, h: float, functional) -> LiftedState:
    """
    One explicit Euler step z <- z - h D V(Z); the base (x, w) is untouched.
    """
    return s.moved(functional.gradient(s), -h)


class GradientFlow:
    """
    Explicit Euler integration of dZ/dt = -D V(Z) with backtracking.

    A step is accepted when V does not increase (up to a relative roundoff slack); otherwise h is halved.
    After `grow_after` consecutive acceptances h grows by `grow`, never beyond the initial step. With a
    gradient window W > 1 the tolerance may also be met by the time-averaged gradient of the last W steps,
    which settles when the iterates oscillate across a jump of a piecewise-constant gradient.

    Attributes:
        functional: Object exposing evaluate(state) -> Evaluation.
        config (FlowConfig): Integrator settings.
    """

    def __init__(self, functional, config: Optional[FlowConfig] = None):
        self.functional = functional
        self.config = config or FlowConfig()

    @staticmethod
    def _averaged_norm(state: LiftedState, t: float, window: deque) -> Optional[float]:
        # (Z_{k-W} - Z_k) / (t_k - t_{k-W}) is the step-weighted mean of the last W gradients
        if len(window) < window.maxlen:
            return None
        t0, z0 = window[0]
        return state.norm(Direction((z0 - state.z) / (t - t0)))

    def _row(self, t: float, s: LiftedState, evaluation: Evaluation, h: float) -> TraceRow:
        return TraceRow(
            t=t,
            value=evaluation.value,
            grad_norm=s.norm(evaluation.gradient),
            barycenter=s.barycenter(),
            max_abs_z=s.max_abs_z(),
            h=h,
            second_moment=s.second_moment(),
            z=s.z.copy(),
            comonotone=is_comonotone(s),
        )

    def integrate(self, s0: LiftedState) -> FlowTrace:
        """
        Integrate from s0 until the gradient tolerance, the time horizon or a step underflow.

        Returns:
            FlowTrace: The recorded trace; StepUnderflow is reported through `termination`.
        """
        cfg = self.config
        trace = FlowTrace()

        state, evaluation = s0, self.functional.evaluate(s0)
        t, h, streak, accepted = 0.0, cfg.step, 0, 0
        trace.rows.append(self._row(t, state, evaluation, h))
        recorded = True
        window = deque([(t, state.z)], maxlen=cfg.grad_window + 1)

        while True:
            grad_norm = state.norm(evaluation.gradient)
            if cfg.grad_window > 1:
                trace.averaged_grad_norm = self._averaged_norm(state, t, window)
            averaged_met = trace.averaged_grad_norm is not None and trace.averaged_grad_norm <= cfg.tol_grad
            if grad_norm <= cfg.tol_grad or averaged_met:
                trace.termination = GRAD_TOLERANCE_MET
                break
            if t >= cfg.t_max:
                trace.termination = T_MAX_REACHED
                break

            step = min(h, cfg.t_max - t)
            trial = state.moved(evaluation.gradient, -step)
            trial_evaluation = self.functional.evaluate(trial)

            if trial_evaluation.value <= evaluation.value + cfg.descent_slack * abs(evaluation.value):
                t += step
                state, evaluation = trial, trial_evaluation
                window.append((t, state.z))
                accepted += 1
                streak += 1
                if streak >= cfg.grow_after:
                    h, streak = min(h * cfg.grow, cfg.step), 0
                recorded = accepted % cfg.record_every == 0
                if recorded:
                    trace.rows.append(self._row(t, state, evaluation, step))
                    log.debug(f"t={t:.4f} V={evaluation.value:.12e} |DV|={grad_norm:.3e} h={step:.3e}")
            else:
                h *= cfg.backtrack
                streak = 0
                if h < cfg.min_step:
                    log.error(f"Step size underflow at t={t:.6f}: no descent with h >= {cfg.min_step}.")
                    trace.termination = STEP_UNDERFLOW
                    break

        if not recorded:
            trace.rows.append(self._row(t, state, evaluation, h))
        trace.final_state = state
        log.info(f"Flow terminated with {trace.termination} at t={t:.4f} after {accepted} steps: "
                 f"V={evaluation.value:.12g}, |DV|={state.norm(evaluation.gradient):.3e}.")
        return trace


def integrate(s0: LiftedState, cfg: FlowConfig, functional) -> FlowTrace:
    return GradientFlow(functional, cfg).integrate(s0)
