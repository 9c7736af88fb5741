from typing import Dict

from bassflow.tables.base import CsvTable


class TraceTable(CsvTable):

    DEFAULT_PATH: str = "trace.csv"
    DEFAULT_SCHEMA: Dict[str, str] = {
        "t": "float64",
        "V": "float64",
        "grad_norm": "float64",
        "bary_{i}": "float64",
        "max_abs_z": "float64",
        "h": "float64",
    }


class PathsTable(CsvTable):

    DEFAULT_PATH: str = "paths.csv"
    DEFAULT_SCHEMA: Dict[str, str] = {
        "path_id": "int64",
        "t": "float64",
        "M": "float64",
        "B": "float64",
    }
