from .check import CheckPipeline
from .oracle import OraclePipeline
from .simulate import SimulatePipeline
from .solve import SolvePipeline, discretize_source, run_solve, solve_state

__all__ = [
    SolvePipeline, SimulatePipeline, CheckPipeline, OraclePipeline,
    run_solve, solve_state, discretize_source,
]
