from .contraction import (contraction_epsilon, hessian_convexity_constant,
                          strong_convexity_bound)
from .convexity import (law_value, monotone_rearrange, pl_ratio,
                        strong_convexity_gap)
from .functional import (BassFunctional, Evaluation,
                         SemiDiscreteBassFunctional, bass_value,
                         conditional_expectation, contraction_factor,
                         grad_time_derivative, gradient,
                         hessian_quadratic_form)
from .state import Direction, LiftedState

__all__ = [
    LiftedState, Direction, Evaluation, BassFunctional, SemiDiscreteBassFunctional,
    bass_value, gradient, conditional_expectation, hessian_quadratic_form, grad_time_derivative,
    contraction_factor, contraction_epsilon, hessian_convexity_constant, strong_convexity_bound,
    monotone_rearrange, strong_convexity_gap, law_value, pl_ratio,
]
