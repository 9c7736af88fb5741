from .ot1d import (BrenierMap1D, brenier_eval, hessian_eval,
                   hessian_lower_bound, smoothed_brenier_eval)
from .semidiscrete import (DualWeights, balance, map_eval, sample_cloud,
                           smoothed_map_eval, solve_potentials)

__all__ = [
    BrenierMap1D, brenier_eval, smoothed_brenier_eval, hessian_eval, hessian_lower_bound,
    DualWeights, balance, map_eval, sample_cloud, smoothed_map_eval, solve_potentials,
]
