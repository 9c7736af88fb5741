from .checks import (DualityGap, MarginalVerdict, MartingaleVerdict,
                     duality_gap, marginal_check, martingale_check, mt_value)
from .simulate import BassMartingale, MartingalePaths, default_grid, simulate

__all__ = [
    MartingalePaths, BassMartingale, simulate, default_grid,
    MarginalVerdict, MartingaleVerdict, DualityGap,
    marginal_check, martingale_check, duality_gap, mt_value,
]
