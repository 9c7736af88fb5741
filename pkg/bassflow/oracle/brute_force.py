import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Tuple, Union

import numpy as np

from bassflow.common.errors import BudgetExhausted, OracleError
from bassflow.measures.coupling import mcov
from bassflow.measures.discrete import DiscreteMeasure, validate
from bassflow.measures.marginals import (MarginalSpec, as_marginal,
                                         gaussian_mixture)

log = logging.getLogger(__name__)

MAX_ATOMS: int = 16
BUDGET: int = 6000
STARTS: int = 3
MIN_STEP: float = 1e-6
JITTER: float = 0.1

Measure = Union[DiscreteMeasure, MarginalSpec]


@dataclass(frozen=True, eq=False)
class BruteForceResult:
    """
    Best law found by the derivative-free search.

    Attributes:
        alpha (DiscreteMeasure): Minimising atoms with their weights.
        value (float): Bass functional at alpha.
        evaluations (int): Functional evaluations spent over all starts.
        exhausted (bool): True when some start ran out of budget before its step shrank below 1e-6.
        spread (float): Largest minus smallest value reached across starts.
    """
    alpha: DiscreteMeasure
    value: float
    evaluations: int
    exhausted: bool
    spread: float

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "evaluations": self.evaluations,
            "exhausted": self.exhausted,
            "spread": self.spread,
            "atoms": self.alpha.values.tolist(),
            "weights": self.alpha.weights.tolist(),
        }


def bass_law_value(atoms: np.ndarray, weights: np.ndarray, mu: Measure, nu: Measure) -> float:
    """
    MCov(alpha * gamma_1, nu) - MCov(alpha, mu) for alpha = sum_i w_i delta_{a_i}.
    """
    return mcov(gaussian_mixture(atoms, weights), nu) - mcov(validate(atoms, weights, 1), mu)


def _descend(objective: Callable[[np.ndarray], float], start: np.ndarray, step: float,
             budget: int) -> Tuple[np.ndarray, float, int, bool]:
    atoms = start.copy()
    best, evaluations = objective(atoms), 1

    while step >= MIN_STEP and evaluations < budget:
        improved = False
        for i in range(len(atoms)):
            for sign in (1.0, -1.0):
                if evaluations >= budget:
                    break
                trial = atoms.copy()
                trial[i] += sign * step
                value = objective(trial)
                evaluations += 1
                if value < best:
                    atoms, best, improved = trial, value, True
                    break
        if not improved:
            step *= 0.5
    return atoms, best, evaluations, step < MIN_STEP


def _starting_points(mu: MarginalSpec, n_atoms: int) -> Tuple[np.ndarray, np.ndarray]:
    if mu.is_discrete and len(mu.measure) == n_atoms:
        ordered = mu.measure.sorted()
        return ordered.values.copy(), ordered.weights.copy()
    u = (np.arange(1, n_atoms + 1) - 0.5) / n_atoms
    return np.asarray(mu.transport(u, 1.0 - u), dtype=float), np.full(n_atoms, 1.0 / n_atoms)


def brute_force_bass_measure(mu: Measure, nu: Measure, n_atoms: int, budget: int = BUDGET, seed: int = 0,
                             starts: int = STARTS, raise_on_exhausted: bool = False) -> BruteForceResult:
    """
    Minimise the Bass functional over laws with `n_atoms` atoms by coordinate descent.

    The weights are those of mu when it has exactly `n_atoms` atoms and uniform otherwise. Every start
    begins at the quantiles of mu, the later ones jittered by seeded Gaussian noise, and tries moves of
    +/- step on one atom at a time, halving the step after a sweep without improvement. Only the maximal
    covariance is shared with the solver.

    Args:
        mu (Measure): Source marginal on the line.
        nu (Measure): Target marginal on the line.
        n_atoms (int): Number of atoms of the candidate laws, at most 16.
        budget (int): Functional evaluations shared out between the starts.
        seed (int): Seed of the jitter.
        starts (int): Number of starts, run in parallel.
        raise_on_exhausted (bool): Raise instead of flagging when the budget runs out.

    Returns:
        BruteForceResult: The best law over all starts.

    Raises:
        OracleError: For d >= 2 or more than 16 atoms.
        BudgetExhausted: If `raise_on_exhausted` and the budget ran out.
    """
    mu, nu = as_marginal(mu), as_marginal(nu)
    if mu.dim != 1 or nu.dim != 1:
        log.error("The brute-force oracle works on the line only")
        raise OracleError("The brute-force oracle works on the line only")
    if not 1 <= n_atoms <= MAX_ATOMS:
        log.error(f"The brute-force oracle takes 1 to {MAX_ATOMS} atoms, got {n_atoms}")
        raise OracleError(f"The brute-force oracle takes 1 to {MAX_ATOMS} atoms, got {n_atoms}")

    centre, weights = _starting_points(mu, n_atoms)
    scale = max(float(np.sqrt(max(mu.second_moment() - mu.mean() ** 2, 0.0))), JITTER)
    rng = np.random.default_rng(seed)
    initial: List[np.ndarray] = [centre] + [centre + JITTER * scale * rng.standard_normal(n_atoms)
                                            for _ in range(starts - 1)]

    def objective(atoms: np.ndarray) -> float:
        return bass_law_value(atoms, weights, mu, nu)

    share = max(budget // starts, 1)
    with ThreadPoolExecutor(max_workers=starts) as pool:
        runs = list(pool.map(lambda start: _descend(objective, start, 0.5 * scale, share), initial))

    values = np.array([value for _, value, _, _ in runs])
    best = int(np.argmin(values))
    atoms = runs[best][0]
    evaluations = sum(count for _, _, count, _ in runs)
    exhausted = not all(converged for _, _, _, converged in runs)

    result = BruteForceResult(
        alpha=validate(atoms, weights, 1),
        value=float(values[best]),
        evaluations=evaluations,
        exhausted=exhausted,
        spread=float(values.max() - values.min()),
    )
    if exhausted:
        log.warning(f"Brute-force budget of {budget} evaluations exhausted; returning the best value "
                    f"{result.value:.8f}.")
        if raise_on_exhausted:
            log.error(f"Budget of {budget} evaluations exhausted at value {result.value:.8f}")
            raise BudgetExhausted(f"Budget of {budget} evaluations exhausted at value {result.value:.8f}")
    log.info(f"Brute-force Bass measure over {n_atoms} atoms: value {result.value:.8f} after "
             f"{evaluations} evaluations.")
    return result
