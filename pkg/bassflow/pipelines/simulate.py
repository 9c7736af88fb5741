import logging
import os

import numpy as np

from bassflow.common.errors import EXIT_OK
from bassflow.common.pipeline import BassPipeline
from bassflow.common.quadrature import QuadratureRule
from bassflow.lifted import BassFunctional
from bassflow.martingale import (default_grid, duality_gap, marginal_check,
                                 martingale_check, simulate)
from bassflow.martingale.checks import MIN_PATHS
from bassflow.pipelines.solve import discretize_source, read_bass_measure
from bassflow.tables import BassMeasureTable, PathsTable

log = logging.getLogger(__name__)


class SimulatePipeline(BassPipeline):
    """
    Simulate the Bass martingale from a solved bass_measure.csv and check it.

    Writes paths.csv and simulate.json, the latter holding the marginal checks at t = 0 (against mu, when
    given) and t = 1 (against nu), the binned martingale residual and the duality gap.
    """
    COMMAND: str = "simulate"
    SUMMARY_PATH: str = "simulate.json"

    def run(self) -> int:
        spec = self.spec
        mu, nu = self.marginals(require_mu=False)

        source = spec.bass_measure or os.path.join(spec.out, BassMeasureTable.DEFAULT_PATH)
        state = read_bass_measure(source)
        rule = QuadratureRule(spec.quad_order)
        v_value = BassFunctional(nu, rule).value(state)

        grid = default_grid()
        paths = simulate(state, nu, rule=rule, n_paths=spec.n_paths, grid=grid, seed=spec.seed,
                         tol=spec.tol, workers=spec.workers)
        PathsTable(spec.out).write(paths.to_frame())

        checks = {"t1": marginal_check(paths, 1.0, nu).to_dict()}
        mu_atoms = None
        if mu is not None:
            mu_atoms = discretize_source(mu, nu, spec.n_atoms, spec.seed)
            checks["t0"] = marginal_check(paths, 0.0, mu_atoms).to_dict()

        martingale = None
        if paths.n_paths >= MIN_PATHS:
            pairs = [(0.0, 0.5), (0.5, 1.0)] if np.any(np.isclose(grid, 0.5)) else [(0.0, 1.0)]
            martingale = martingale_check(paths, pairs).to_dict()
        else:
            log.warning(f"Only {paths.n_paths} paths; martingale check skipped.")

        self.write_summary(self.document(
            exit_code=EXIT_OK,
            n_paths=paths.n_paths,
            grid=grid.tolist(),
            V=v_value,
            marginals=checks,
            martingale=martingale,
            duality=duality_gap(paths, v_value, mu_atoms, nu).to_dict(),
        ))
        return EXIT_OK
