from .coupling import mcov, mcov_lp, wasserstein2_1d
from .discrete import DiscreteMeasure, dirac, moments, uniform, validate
from .marginals import (EmpiricalMarginal, GaussianMarginal, MarginalSpec,
                        MixtureMarginal, UniformMarginal, as_marginal,
                        gaussian_mixture, parse_marginal)
from .order import (AssumptionReport, ConvexOrderResult,
                    IrreducibilityResult, assumption_report,
                    convex_order_check_1d, irreducibility_check_1d, potential)
from .smoothing import SmoothedLaw, cdf_eval, gaussian_smooth

__all__ = [
    DiscreteMeasure, dirac, moments, uniform, validate,
    MarginalSpec, GaussianMarginal, UniformMarginal, EmpiricalMarginal, MixtureMarginal,
    as_marginal, gaussian_mixture, parse_marginal,
    SmoothedLaw, gaussian_smooth, cdf_eval,
    mcov, mcov_lp, wasserstein2_1d,
    ConvexOrderResult, IrreducibilityResult, AssumptionReport,
    convex_order_check_1d, irreducibility_check_1d, assumption_report, potential,
]
