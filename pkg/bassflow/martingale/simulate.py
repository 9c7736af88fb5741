import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy.interpolate import PchipInterpolator

from bassflow.common.errors import (NotStationary, TimeNotOnGrid,
                                    UnsupportedDimension)
from bassflow.common.quadrature import QuadratureRule
from bassflow.lifted.functional import BassFunctional
from bassflow.lifted.state import LiftedState
from bassflow.measures.marginals import MarginalSpec

log = logging.getLogger(__name__)

N_PATHS: int = 100_000
BLOCK_PATHS: int = 8192
GRID_STEPS: int = 10
TABLE_POINTS: int = 20001
TABLE_MARGIN: float = 12.0
STATIONARY_FACTOR: float = 10.0
GRID_ATOL: float = 1e-12


@dataclass(frozen=True, eq=False)
class MartingalePaths:
    """
    Simulated paths of the Bass martingale M_t = E[T(B_1) | B_t] and of its driving Brownian motion.

    Attributes:
        grid (np.ndarray): Times 0 = t_0 < ... < t_K = 1.
        M (np.ndarray): Martingale values, shape (n_paths, K + 1).
        B (np.ndarray): Brownian values, shape (n_paths, K + 1).
        seed (int): Seed the paths were drawn from.
    """
    grid: np.ndarray
    M: np.ndarray
    B: np.ndarray
    seed: int

    @property
    def n_paths(self) -> int:
        return self.M.shape[0]

    def index(self, t: float) -> int:
        hits = np.flatnonzero(np.isclose(self.grid, t, rtol=0.0, atol=GRID_ATOL))
        if not len(hits):
            log.error(f"Time {t} is not on the simulation grid.")
            raise TimeNotOnGrid(f"Time {t} is not on the simulation grid {self.grid.tolist()}")
        return int(hits[0])

    def at(self, t: float) -> np.ndarray:
        return self.M[:, self.index(t)]

    def driver_at(self, t: float) -> np.ndarray:
        return self.B[:, self.index(t)]

    def to_frame(self) -> pd.DataFrame:
        """Long format with one row per (path, time)."""
        steps = len(self.grid)
        return pd.DataFrame({
            'path_id': np.repeat(np.arange(self.n_paths), steps),
            't': np.tile(self.grid, self.n_paths),
            'M': self.M.ravel(),
            'B': self.B.ravel(),
        })


def default_grid(steps: int = GRID_STEPS) -> np.ndarray:
    return np.linspace(0.0, 1.0, steps + 1)


def _check_grid(grid: Sequence[float]) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or grid[0] != 0.0 or grid[-1] != 1.0 or np.any(np.diff(grid) <= 0):
        log.error(f"Time grid must increase strictly from 0 to 1, got {grid.tolist()}")
        raise TimeNotOnGrid(f"Time grid must increase strictly from 0 to 1, got {grid.tolist()}")
    return grid


class BassMartingale:
    """
    The martingale driven by a Brownian motion started from the Bass measure L(Z*).

    M_t is the heat-smoothed Brenier map evaluated at B_t; the map and its smoothed versions are tabulated
    once on a fine grid and interpolated monotonically, except at t = 1 where the map is applied exactly.

    Attributes:
        state (LiftedState): Converged state; its law is the Bass measure.
        functional (BassFunctional): Functional providing the Brenier map onto nu.
    """

    def __init__(self, state: LiftedState, functional: BassFunctional):
        self.state = state
        self.functional = functional
        self.brenier = functional.brenier(state.zv, state.w)

        lo, hi = float(state.zv.min()) - TABLE_MARGIN, float(state.zv.max()) + TABLE_MARGIN
        reach = float(np.max(np.abs(functional.rule.nodes)))
        outer = np.linspace(lo - reach, hi + reach, 2 * TABLE_POINTS - 1)
        self._map = PchipInterpolator(outer, self.brenier(outer), extrapolate=False)
        self._outer = (outer[0], outer[-1])
        self._table = np.linspace(lo, hi, TABLE_POINTS)

    def smoothed_map(self, t: float) -> PchipInterpolator:
        """x -> E[T(x + sqrt(1 - t) G)], tabulated."""
        zeta = self._table[:, None] + self.functional.rule.scaled(1.0 - t)[None, :]
        values = self.functional.rule.expect(self._map(np.clip(zeta, *self._outer)))
        return PchipInterpolator(self._table, values, extrapolate=False)

    def evaluate(self, t: float, b: np.ndarray) -> np.ndarray:
        if t >= 1.0:
            return self.brenier(b)
        return self.smoothed_map(t)(np.clip(b, self._table[0], self._table[-1]))


def _block(martingale: BassMartingale, grid: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    s = martingale.state
    start = s.zv[rng.choice(len(s), size=size, p=s.w)]
    increments = rng.standard_normal((size, len(grid) - 1)) * np.sqrt(np.diff(grid))[None, :]
    return np.concatenate([start[:, None], start[:, None] + np.cumsum(increments, axis=1)], axis=1)


def simulate(s_star: LiftedState, nu: MarginalSpec, rule: Optional[QuadratureRule] = None,
             n_paths: int = N_PATHS, grid: Optional[Sequence[float]] = None, seed: int = 0,
             tol: float = 1e-7, workers: int = 1) -> MartingalePaths:
    """
    Simulate the Bass martingale from a converged state.

    B_0 is drawn from the atoms of L(Z*) and moved by Brownian increments on the time grid. Paths are drawn
    in fixed-size blocks, each with its own stream spawned from `seed`, so the output does not depend on
    the number of workers.

    Args:
        s_star (LiftedState): Near-stationary state on the line.
        nu (MarginalSpec): Target marginal.
        rule (Optional[QuadratureRule]): Rule used for the heat smoothing.
        n_paths (int): Number of paths.
        grid (Optional[Sequence[float]]): Time grid containing 0 and 1; defaults to 11 equispaced times.
        seed (int): Root seed.
        tol (float): Flow tolerance; the state must satisfy ||D V|| <= 10 tol.
        workers (int): Threads drawing path blocks.

    Returns:
        MartingalePaths: The simulated paths.

    Raises:
        NotStationary: If the state is not near a critical point.
        UnsupportedDimension: For states in d >= 2.
    """
    if s_star.dim != 1:
        log.error(f"Path simulation needs dim=1, got {s_star.dim}")
        raise UnsupportedDimension(f"Path simulation needs dim=1, got {s_star.dim}")
    grid = _check_grid(default_grid() if grid is None else grid)

    functional = BassFunctional(nu, rule)
    grad_norm = s_star.norm(functional.gradient(s_star))
    if grad_norm > STATIONARY_FACTOR * tol:
        log.error(f"State is not stationary: ||DV||={grad_norm:.3e} > {STATIONARY_FACTOR * tol:.3e}.")
        raise NotStationary(f"State is not stationary: ||DV||={grad_norm:.3e}")

    martingale = BassMartingale(s_star, functional)
    sizes = [min(BLOCK_PATHS, n_paths - start) for start in range(0, n_paths, BLOCK_PATHS)]
    streams = [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(len(sizes))]

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        blocks = list(pool.map(lambda args: _block(martingale, grid, *args), zip(sizes, streams)))
    B = np.concatenate(blocks, axis=0) if blocks else np.empty((0, len(grid)))

    M = np.empty_like(B)
    for k, t in enumerate(grid):
        M[:, k] = martingale.evaluate(float(t), B[:, k])
        log.debug(f"Evaluated M at t={t:.3f}.")

    log.info(f"Simulated {n_paths} paths on {len(grid)} times with seed {seed}.")
    return MartingalePaths(grid=grid, M=M, B=B, seed=seed)
