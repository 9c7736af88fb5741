import logging
import os
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional

from bassflow.common.config import load_config, merge_options
from bassflow.common.errors import SpecError
from bassflow.common.quadrature import DEFAULT_ORDER

log = logging.getLogger(__name__)

MAX_SEED: int = 2 ** 64


@dataclass(frozen=True)
class SolveSpec:
    """
    Everything a command needs to run, resolved from flags, an optional JSON file and defaults.

    Attributes:
        mu (Optional[str]): Source marginal in the marginal grammar.
        nu (Optional[str]): Target marginal in the marginal grammar.
        n_atoms (int): Atoms used to discretise a parametric mu.
        step (float): Initial Euler step.
        tol (float): Gradient-norm tolerance.
        t_max (float): Flow time horizon.
        quad_order (int): Gauss-Hermite order.
        seed (int): Root seed, an unsigned 64-bit integer.
        out (str): Output directory.
        workers (int): Worker threads for Monte-Carlo stages.
        init (Optional[str]): bass_measure.csv whose z columns start the flow.
        delta (Optional[float]): Slice depth of the bound certificate.
        samples_per_atom (int): Gaussian increments per atom in d >= 2.
        n_paths (int): Simulated paths.
        bass_measure (Optional[str]): bass_measure.csv consumed by simulate.
        budget (int): Evaluation budget of the brute-force oracle.
        starts (int): Starts of the brute-force oracle.
    """
    mu: Optional[str] = None
    nu: Optional[str] = None
    n_atoms: int = 200
    step: float = 0.1
    tol: float = 1e-7
    t_max: float = 200.0
    quad_order: int = DEFAULT_ORDER
    seed: int = 0
    out: str = '.'
    workers: int = 1
    init: Optional[str] = None
    delta: Optional[float] = None
    samples_per_atom: int = 128
    n_paths: int = 100_000
    bass_measure: Optional[str] = None
    budget: int = 6000
    starts: int = 3

    def __post_init__(self):
        if not isinstance(self.n_atoms, int) or self.n_atoms < 2:
            raise SpecError(f"n_atoms must be an integer of at least 2, got {self.n_atoms!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < MAX_SEED:
            raise SpecError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        for name in ('workers', 'samples_per_atom', 'n_paths', 'budget', 'starts', 'quad_order'):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise SpecError(f"{name} must be a positive integer, got {value!r}")

        try:
            os.makedirs(self.out, exist_ok=True)
        except OSError as e:
            raise SpecError(f"Output directory {self.out} cannot be created: {e}") from e
        if not os.access(self.out, os.W_OK):
            raise SpecError(f"Output directory {self.out} is not writable")

    @classmethod
    def from_options(cls, flags: Dict[str, Any], config_path: Optional[str] = None) -> 'SolveSpec':
        """
        Resolve options with flags over the configuration file over the defaults.

        Raises:
            SpecError: On unknown configuration keys or invalid values.
        """
        names = {f.name for f in fields(cls)}
        config = load_config(config_path)
        unknown = sorted(set(config) - names)
        if unknown:
            log.error(f"Unknown configuration keys {unknown}.")
            raise SpecError(f"Unknown configuration keys {unknown}")

        defaults = {f.name: f.default for f in fields(cls)}
        merged = merge_options({k: v for k, v in flags.items() if k in names}, config, defaults)
        return cls(**merged)

    def to_dict(self) -> dict:
        return asdict(self)
