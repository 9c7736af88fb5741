import logging
from typing import Optional

import numpy as np
import pandas as pd

from bassflow.common.errors import (EXIT_OK, EXIT_STEP_UNDERFLOW, EXIT_T_MAX,
                                    CertificateError, DensityRequired,
                                    InsufficientTrace, NotInConvexOrder,
                                    SpecError)
from bassflow.common.pipeline import BassPipeline
from bassflow.common.quadrature import QuadratureRule
from bassflow.flow import (GRAD_TOLERANCE_MET, STEP_UNDERFLOW, FlowConfig,
                           FlowTrace, GradientFlow, barycenter_drift,
                           bound_certificate, boundedness_monitor,
                           rate_estimate)
from bassflow.lifted import (BassFunctional, LiftedState,
                             SemiDiscreteBassFunctional, law_value,
                             strong_convexity_bound)
from bassflow.measures import (DiscreteMeasure, MarginalSpec,
                               assumption_report, convex_order_check_1d,
                               validate)
from bassflow.tables import BassMeasureTable, TraceTable
from bassflow.tables.base import infer_dim

log = logging.getLogger(__name__)

ORDER_SLACK: float = 1e-6
RECENTRE_TOL: float = 1e-6
# d >= 2 gradients are piecewise constant in Z; stop on their average over this many steps
SEMIDISCRETE_GRAD_WINDOW: int = 20

EXIT_CODES = {
    GRAD_TOLERANCE_MET: EXIT_OK,
    STEP_UNDERFLOW: EXIT_STEP_UNDERFLOW,
}


def discretize_source(mu: MarginalSpec, nu: MarginalSpec, n_atoms: int, seed: int = 0) -> DiscreteMeasure:
    """
    Discretise mu for the flow.

    On the line a parametric mu becomes n quantile midpoints, recentred onto the barycenter of nu when the
    two differ by less than 1e-6 only. Discrete clouds keep their atoms, except that clouds in d >= 2 with
    more than `n_atoms` atoms are subsampled i.i.d. with the given seed.
    """
    if mu.dim >= 2:
        if len(mu.measure) <= n_atoms:
            return mu.measure
        rng = np.random.default_rng(seed)
        points = mu.sample(n_atoms, rng)
        log.info(f"Subsampled {n_atoms} of {len(mu.measure)} atoms of mu with seed {seed}.")
        return validate(points, np.full(n_atoms, 1.0 / n_atoms), mu.dim)

    discrete = mu.discretize(n_atoms)
    mismatch = nu.mean() - float(discrete.weights @ discrete.values)
    if 0.0 < abs(mismatch) < RECENTRE_TOL:
        log.debug(f"Recentring the discretised mu by {mismatch:.3e}.")
        discrete = validate(discrete.values + mismatch, discrete.weights, 1)
    return discrete


def bass_measure_frame(state: LiftedState) -> pd.DataFrame:
    data = {}
    for i in range(state.dim):
        data[f'x{i + 1}'] = state.x[:, i]
    for i in range(state.dim):
        data[f'z{i + 1}'] = state.z[:, i]
    data['w'] = state.w
    return pd.DataFrame(data)


def read_bass_measure(path: str) -> LiftedState:
    dim = infer_dim(path, prefix='x')
    df = BassMeasureTable(dim=dim).read(path)
    x = df[[f'x{i}' for i in range(1, dim + 1)]].to_numpy()
    z = df[[f'z{i}' for i in range(1, dim + 1)]].to_numpy()
    base = validate(x, df['w'].to_numpy(), dim)
    return LiftedState.from_measure(base, z=z)


class SolvePipeline(BassPipeline):
    """
    Checks, flow, rate fit and certificates for one pair of marginals.

    Writes trace.csv, bass_measure.csv and summary.json to the output directory. The exit code is 0 when
    the gradient tolerance is met, 2 when the time horizon is reached, 3 on a failed precondition and 4 on
    a step-size underflow.
    """
    COMMAND: str = "solve"
    SUMMARY_PATH: str = "summary.json"

    def initial_state(self, mu_atoms: DiscreteMeasure) -> LiftedState:
        if self.spec.init is None:
            return LiftedState.from_measure(mu_atoms)

        start = read_bass_measure(self.spec.init)
        if len(start) != len(mu_atoms) or start.dim != mu_atoms.dim:
            log.error(f"Initial state {self.spec.init} does not match the discretised mu.")
            raise SpecError(f"Initial state {self.spec.init} has {len(start)} atoms in d={start.dim}, "
                            f"expected {len(mu_atoms)} in d={mu_atoms.dim}")
        log.info(f"Starting the flow from {self.spec.init}.")
        return LiftedState.from_measure(mu_atoms, z=start.z)

    def functional(self, nu: MarginalSpec, rule: QuadratureRule):
        if nu.dim == 1:
            return BassFunctional(nu, rule)
        if not nu.is_discrete:
            log.error(f"Target {nu.describe()} in d={nu.dim} is not a discrete cloud.")
            raise SpecError("Targets in d >= 2 must be discrete clouds")
        return SemiDiscreteBassFunctional(nu.measure, samples_per_atom=self.spec.samples_per_atom,
                                          seed=self.spec.seed, workers=self.spec.workers)

    def preconditions(self, mu_atoms: DiscreteMeasure, nu: MarginalSpec) -> dict:
        order = convex_order_check_1d(mu_atoms, nu, slack=ORDER_SLACK)
        if order.ordered is False:
            log.error(f"mu and nu are not in convex order: mean gap {order.mean_gap:.3e}, "
                      f"witness {order.witness}.")
            raise NotInConvexOrder("mu and nu are not in convex order", witness=order.witness)
        report = assumption_report(mu_atoms, nu, slack=ORDER_SLACK)
        return {"convex_order": order.to_dict(), "assumptions": report.to_dict()}

    def diagnostics(self, trace: FlowTrace, mu_atoms: DiscreteMeasure, nu: MarginalSpec,
                    functional) -> dict:
        final = trace.final_state
        out = {"barycenter_drift": barycenter_drift(trace), "kappa_v": None, "kappa_z": None, "r2": None,
               "rates": None, "certificate": None, "monitor": None, "strong_convexity": None, "law_value": None}

        try:
            rates = rate_estimate(trace, trace.final.value, final)
            out.update(kappa_v=rates.kappa_v, kappa_z=rates.kappa_z, r2=rates.r2, rates=rates.to_dict())
        except InsufficientTrace as e:
            log.warning(f"No rate fit: {e.message}")

        if self.spec.delta is not None:
            try:
                certificate = bound_certificate(mu_atoms, nu, self.spec.delta,
                                                second_moment=float(trace.second_moments.max()))
                out["certificate"] = certificate.to_dict()
                out["monitor"] = boundedness_monitor(trace, certificate).to_dict()
            except CertificateError as e:
                log.warning(f"No bound certificate: {e.message}")
                out["certificate"] = {"error": e.to_dict()}

        if final.dim == 1:
            out["law_value"] = law_value(final.law(), mu_atoms, functional)
            try:
                R = float(np.max(np.abs(trace.z_history)))
                out["strong_convexity"] = strong_convexity_bound(R, nu, functional.rule)
            except DensityRequired:
                log.debug("Target has no density; strong convexity bound skipped.")
        return out

    def run(self) -> int:
        spec = self.spec
        mu, nu = self.marginals()
        mu_atoms = discretize_source(mu, nu, spec.n_atoms, spec.seed)
        checks = self.preconditions(mu_atoms, nu)

        config = FlowConfig(step=spec.step, tol_grad=spec.tol, t_max=spec.t_max, quad_order=spec.quad_order,
                            grad_window=1 if mu_atoms.dim == 1 else SEMIDISCRETE_GRAD_WINDOW)
        rule = QuadratureRule(spec.quad_order)
        functional = self.functional(nu, rule)
        trace = GradientFlow(functional, config).integrate(self.initial_state(mu_atoms))

        TraceTable(spec.out, dim=mu_atoms.dim).write(trace.to_frame())
        BassMeasureTable(spec.out, dim=mu_atoms.dim).write(bass_measure_frame(trace.final_state))

        code = EXIT_CODES.get(trace.termination, EXIT_T_MAX)
        final = trace.final
        self.write_summary(self.document(
            exit_code=code,
            termination=trace.termination,
            n_atoms=len(mu_atoms),
            t_final=final.t,
            steps=len(trace) - 1,
            V_final=final.value,
            grad_norm_final=final.grad_norm,
            averaged_grad_norm_final=trace.averaged_grad_norm,
            hypotheses="checked" if mu_atoms.dim == 1 else "unverified",
            barycenter_final=final.barycenter.tolist(),
            max_abs_z=float(trace.final_state.max_abs_z()),
            comonotone_final=final.comonotone,
            **checks,
            **self.diagnostics(trace, mu_atoms, nu, functional),
        ))
        return code


def run_solve(spec) -> int:
    return SolvePipeline(spec).execute()


def solve_state(mu: MarginalSpec, nu: MarginalSpec, n_atoms: int = 200,
                config: Optional[FlowConfig] = None) -> FlowTrace:
    """
    Discretise mu and run the flow from the identity start, without checks or outputs.
    """
    config = config or FlowConfig()
    mu_atoms = discretize_source(mu, nu, n_atoms)
    functional = BassFunctional(nu, QuadratureRule(config.quad_order))
    return GradientFlow(functional, config).integrate(LiftedState.from_measure(mu_atoms))
