import logging
from typing import Dict

import numpy as np

from bassflow.measures.discrete import DiscreteMeasure, validate
from bassflow.tables.base import CsvTable, infer_dim

log = logging.getLogger(__name__)


class MarginalTable(CsvTable):

    DEFAULT_PATH: str = "marginal.csv"
    DEFAULT_SCHEMA: Dict[str, str] = {
        "x{i}": "float64",
        "w": "float64",
    }


class BassMeasureTable(CsvTable):

    DEFAULT_PATH: str = "bass_measure.csv"
    DEFAULT_SCHEMA: Dict[str, str] = {
        "x{i}": "float64",
        "z{i}": "float64",
        "w": "float64",
    }


def read_marginal(path: str) -> DiscreteMeasure:
    """
    Load a weighted point cloud ``x1..xd, w`` as a discrete measure.

    Positive weights are renormalised to sum to one, so counts or unnormalised masses are accepted.
    """
    dim = infer_dim(path, prefix='x')
    df = MarginalTable(dim=dim).read(path)
    points = df[[f'x{i}' for i in range(1, dim + 1)]].to_numpy()
    weights = df['w'].to_numpy(dtype=float)
    if np.all(weights > 0) and np.all(np.isfinite(weights)):
        weights = weights / weights.sum()
    log.info(f"Read {len(df)} atoms in dimension {dim} from {path}.")
    return validate(points, weights, dim)
