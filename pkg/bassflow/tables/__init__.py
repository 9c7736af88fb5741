from .measures import BassMeasureTable, MarginalTable, read_marginal
from .runs import PathsTable, TraceTable

__all__ = [
    BassMeasureTable, MarginalTable, PathsTable, TraceTable, read_marginal,
]
