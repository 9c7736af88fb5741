import logging
import os
from typing import Dict, List, Optional

import pandas as pd

from bassflow.common.errors import SpecError

log = logging.getLogger(__name__)

FLOAT_FORMAT: str = '%.17g'


class CsvTable:
    """
    A persisted CSV table with a declared column schema.

    Schema keys containing ``{i}`` are coordinate columns and expand to one column per dimension
    (``x{i}`` becomes ``x1, ..., xd``).

    Attributes:
        DEFAULT_PATH (str): File name of the table inside its directory.
        DEFAULT_SCHEMA (Dict[str, str]): Column name (or coordinate template) to pandas dtype.
        directory (str): Directory holding the table.
        dim (int): Dimension used to expand coordinate columns.
    """
    DEFAULT_PATH: str = ""
    DEFAULT_SCHEMA: Dict[str, str] = {}

    def __init__(self, directory: str = '.', dim: int = 1):
        self.directory = directory
        self.dim = dim

    @property
    def path(self) -> str:
        return os.path.join(self.directory, self.DEFAULT_PATH)

    @property
    def schema(self) -> Dict[str, str]:
        schema = {}
        for column, dtype in self.DEFAULT_SCHEMA.items():
            if '{i}' in column:
                schema.update({column.format(i=i): dtype for i in range(1, self.dim + 1)})
            else:
                schema[column] = dtype
        return schema

    @property
    def columns(self) -> List[str]:
        return list(self.schema)

    def write(self, df: pd.DataFrame) -> str:
        """
        Write the frame with every float at 17 significant digits.

        Args:
            df (pd.DataFrame): Frame holding at least the schema columns.

        Returns:
            str: The path written.

        Raises:
            SpecError: If a schema column is missing.
        """
        missing = [col for col in self.columns if col not in df.columns]
        if missing:
            log.error(f"{type(self).__name__} is missing columns {missing}.")
            raise SpecError(f"{type(self).__name__} is missing columns {missing}")

        os.makedirs(self.directory, exist_ok=True)
        df[self.columns].astype(self.schema).to_csv(self.path, index=False, float_format=FLOAT_FORMAT)
        log.info(f"Wrote {len(df)} rows to {self.path}.")
        return self.path

    def read(self, path: Optional[str] = None) -> pd.DataFrame:
        """
        Read the table and check its header against the schema.

        Raises:
            SpecError: If the file is unreadable or a schema column is absent.
        """
        path = path or self.path
        try:
            df = pd.read_csv(path)
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            log.error(f"Failed to read {path}: {e}")
            raise SpecError(f"Failed to read {path}: {e}") from e

        missing = [col for col in self.columns if col not in df.columns]
        if missing:
            log.error(f"{path} is missing columns {missing}.")
            raise SpecError(f"{path} is missing columns {missing}")
        return df[self.columns].astype(self.schema)


def infer_dim(path: str, prefix: str = 'x') -> int:
    """
    Count the numbered coordinate columns ``prefix1, prefix2, ...`` in a CSV header.
    """
    try:
        header = pd.read_csv(path, nrows=0).columns
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        log.error(f"Failed to read {path}: {e}")
        raise SpecError(f"Failed to read {path}: {e}") from e

    dim = 0
    while f"{prefix}{dim + 1}" in header:
        dim += 1
    if dim == 0:
        log.error(f"{path} has no {prefix}1 column")
        raise SpecError(f"{path} has no {prefix}1 column")
    return dim
