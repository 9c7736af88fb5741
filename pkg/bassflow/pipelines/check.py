import logging

from bassflow.common.errors import EXIT_OK, NotInConvexOrder
from bassflow.common.pipeline import BassPipeline
from bassflow.measures import (assumption_report, convex_order_check_1d,
                               irreducibility_check_1d)
from bassflow.pipelines.solve import ORDER_SLACK, discretize_source

log = logging.getLogger(__name__)


class CheckPipeline(BassPipeline):
    """
    Report convex order, irreducibility and the standing hypotheses for (mu, nu) without solving.
    """
    COMMAND: str = "check"
    SUMMARY_PATH: str = "check.json"

    def run(self) -> int:
        mu, nu = self.marginals()
        mu_atoms = discretize_source(mu, nu, self.spec.n_atoms, self.spec.seed)

        order = convex_order_check_1d(mu_atoms, nu, slack=ORDER_SLACK)
        if order.ordered is False:
            log.error(f"mu and nu are not in convex order: witness {order.witness}.")
            raise NotInConvexOrder("mu and nu are not in convex order", witness=order.witness)

        irreducible = irreducibility_check_1d(mu_atoms, nu, slack=ORDER_SLACK)
        report = assumption_report(mu_atoms, nu, slack=ORDER_SLACK)
        self.write_summary(self.document(
            exit_code=EXIT_OK,
            convex_order=order.to_dict(),
            irreducibility=irreducible.to_dict(),
            assumptions=report.to_dict(),
            second_order_ready=report.second_order_ready,
        ))
        return EXIT_OK
