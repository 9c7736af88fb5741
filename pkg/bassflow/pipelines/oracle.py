import logging

from bassflow.common.errors import EXIT_OK, SpecError
from bassflow.common.pipeline import BassPipeline
from bassflow.oracle import brute_force_bass_measure
from bassflow.oracle.brute_force import MAX_ATOMS
from bassflow.pipelines.solve import discretize_source

log = logging.getLogger(__name__)


class OraclePipeline(BassPipeline):
    """
    Brute-force Bass measure for a small discretisation of mu, written to oracle.json.
    """
    COMMAND: str = "oracle"
    SUMMARY_PATH: str = "oracle.json"

    def run(self) -> int:
        spec = self.spec
        if spec.n_atoms > MAX_ATOMS:
            log.error(f"The oracle takes at most {MAX_ATOMS} atoms, got --n-atoms {spec.n_atoms}")
            raise SpecError(f"The oracle takes at most {MAX_ATOMS} atoms, got --n-atoms {spec.n_atoms}")

        mu, nu = self.marginals()
        mu_atoms = discretize_source(mu, nu, spec.n_atoms, spec.seed)
        result = brute_force_bass_measure(mu_atoms, nu, n_atoms=min(len(mu_atoms), spec.n_atoms),
                                          budget=spec.budget, seed=spec.seed, starts=spec.starts)
        self.write_summary(self.document(exit_code=EXIT_OK, oracle=result.to_dict()))
        return EXIT_OK
