import logging
import os
from abc import ABC, abstractmethod
from typing import Optional, Tuple

from bassflow.common.config import dumps
from bassflow.common.errors import BassFlowError, DimensionMismatch, SpecError
from bassflow.common.spec import SolveSpec
from bassflow.measures.marginals import MarginalSpec, parse_marginal
from bassflow.tables import read_marginal

log = logging.getLogger(__name__)

SCHEMA_VERSION: int = 1


class BassPipeline(ABC):
    """
    Base class of the batch commands.

    A pipeline resolves its marginals from its SolveSpec, does its work in `run` and writes one JSON document to
    the output directory. Any BassFlowError raised on the way is caught by `execute`, recorded in the
    document's ``error`` block and turned into the exit code the error carries.

    Attributes:
        COMMAND (str): Name of the sub-command.
        SUMMARY_PATH (str): File name of the JSON document.
        spec (SolveSpec): Resolved options.
    """
    COMMAND: str = ""
    SUMMARY_PATH: str = "summary.json"

    def __init__(self, spec: SolveSpec):
        self.spec = spec

    @property
    def summary_path(self) -> str:
        return os.path.join(self.spec.out, self.SUMMARY_PATH)

    def marginals(self, require_mu: bool = True) -> Tuple[Optional[MarginalSpec], MarginalSpec]:
        """
        Parse mu and nu.

        Raises:
            SpecError: If a required marginal is missing or malformed.
            DimensionMismatch: If the two marginals live in different dimensions.
        """
        if self.spec.nu is None or (require_mu and self.spec.mu is None):
            log.error(f"{self.COMMAND} is missing a marginal declaration.")
            raise SpecError(f"{self.COMMAND} needs --mu and --nu" if require_mu else f"{self.COMMAND} needs --nu")

        nu = parse_marginal(self.spec.nu, reader=read_marginal)
        mu = parse_marginal(self.spec.mu, reader=read_marginal) if self.spec.mu is not None else None
        if mu is not None and mu.dim != nu.dim:
            log.error(f"mu has dimension {mu.dim} but nu has dimension {nu.dim}")
            raise DimensionMismatch(f"mu has dimension {mu.dim} but nu has dimension {nu.dim}")
        log.info(f"Marginals: mu={mu.describe() if mu is not None else None}, nu={nu.describe()}.")
        return mu, nu

    def document(self, **fields) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.COMMAND,
            "config": self.spec.to_dict(),
            "error": None,
            **fields,
        }

    def write_summary(self, document: dict) -> str:
        os.makedirs(self.spec.out, exist_ok=True)
        with open(self.summary_path, 'w') as file:
            file.write(dumps(document) + '\n')
        log.info(f"Wrote {self.summary_path}.")
        return self.summary_path

    @abstractmethod
    def run(self) -> int:
        """Do the work, write the document and return the exit code."""

    def execute(self) -> int:
        try:
            code = self.run()
        except BassFlowError as e:
            log.error(f"{self.COMMAND} failed with {type(e).__name__}: {e.message}")
            self.write_summary(self.document(exit_code=e.exit_code, error=e.to_dict()))
            return e.exit_code
        log.info(f"{self.COMMAND} finished with exit code {code}.")
        return code

