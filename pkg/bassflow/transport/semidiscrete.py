import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from bassflow.common.errors import NoConvergence, SemiDiscreteError
from bassflow.measures.discrete import DiscreteMeasure
from bassflow.measures.smoothing import SmoothedLaw

log = logging.getLogger(__name__)

MAX_TARGET_ATOMS: int = 1024
TOL_MASS: float = 5e-3
MAX_ITER: int = 4000
MC_SAMPLES: int = 512
# Rows of the (cloud x atoms) score matrix handled per block
CHUNK_ROWS: int = 8192


@dataclass(frozen=True, eq=False)
class DualWeights:
    """
    Dual potentials of the semi-discrete transport onto a discrete target.

    The Brenier map sends z to the atom y_j maximising <z, y_j> - psi_j; psi[0] is normalised to zero.

    Attributes:
        psi (np.ndarray): One potential per target atom.
        target (DiscreteMeasure): The discrete target nu.
        residual (float): Largest per-cell mass deviation on the balancing cloud.
        residual_l1 (float): Total absolute mass deviation on the balancing cloud.
        iterations (int): Ascent iterations spent.
    """
    psi: np.ndarray
    target: DiscreteMeasure
    residual: float = 0.0
    residual_l1: float = 0.0
    iterations: int = 0

    def assign(self, z: np.ndarray, workers: int = 1) -> np.ndarray:
        """
        Laguerre cell index of every row of z; ties go to the lowest index.
        """
        z = np.asarray(z, dtype=float).reshape(-1, self.target.dim)
        blocks = [z[start:start + CHUNK_ROWS] for start in range(0, len(z), CHUNK_ROWS)]

        def block_argmax(block):
            return np.argmax(block @ self.target.points.T - self.psi, axis=1)

        if workers > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(block_argmax, blocks))
        else:
            parts = [block_argmax(block) for block in blocks]
        return np.concatenate(parts) if parts else np.empty(0, dtype=int)

    def masses(self, cloud: np.ndarray, cloud_weights: np.ndarray, workers: int = 1) -> np.ndarray:
        return np.bincount(self.assign(cloud, workers), weights=cloud_weights, minlength=len(self.target))

    def objective(self, cloud: np.ndarray, cloud_weights: np.ndarray, workers: int = 1) -> float:
        """
        Dual value E[max_j(<Z, y_j> - psi_j)] + sum_j psi_j nu_j, an upper bound of the maximal covariance.
        """
        index = self.assign(cloud, workers)
        scores = np.einsum('nd,nd->n', cloud.reshape(len(index), -1), self.target.points[index]) - self.psi[index]
        return float(cloud_weights @ scores + self.psi @ self.target.weights)

    def with_psi(self, psi: np.ndarray, residual: float, residual_l1: float, iterations: int) -> 'DualWeights':
        return DualWeights(psi=psi - psi[0], target=self.target, residual=residual, residual_l1=residual_l1,
                           iterations=iterations)


def map_eval(psi: DualWeights, z) -> np.ndarray:
    """
    The target atom whose Laguerre cell contains each point z.
    """
    z = np.asarray(z, dtype=float)
    index = psi.assign(z)
    shape = z.shape[:-1] if z.ndim > 1 else ()
    return psi.target.points[index].reshape(shape + (psi.target.dim,))


def _antithetic(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    half = rng.standard_normal(((n + 1) // 2, dim))
    return np.concatenate([half, -half])[:n]


def smoothed_map_eval(psi: DualWeights, z, mc_samples: int = MC_SAMPLES, seed: int = 0) -> np.ndarray:
    """
    Seeded Monte-Carlo estimate of E[T(z + G)], G ~ N(0, I), with antithetic Gaussian samples shared
    by every query point.
    """
    z = np.asarray(z, dtype=float)
    points = z.reshape(-1, psi.target.dim)
    noise = _antithetic(np.random.default_rng(seed), mc_samples, psi.target.dim)
    mapped = map_eval(psi, points[:, None, :] + noise[None, :, :])
    return mapped.mean(axis=1).reshape(z.shape)


def sample_cloud(beta: SmoothedLaw, mc_samples: int, seed: int, workers: int = 1) -> np.ndarray:
    """
    Draw antithetic samples of beta, split into independent streams per worker.

    The streams come from spawning the seed, so the cloud depends on (seed, workers) only.
    """
    workers = max(1, workers)
    sizes = np.full(workers, mc_samples // workers)
    sizes[:mc_samples % workers] += 1
    streams = np.random.SeedSequence(seed).spawn(workers)

    def draw(args):
        stream, size = args
        rng = np.random.default_rng(stream)
        index = rng.choice(len(beta.weights), size=(size + 1) // 2, p=beta.weights)
        noise = rng.standard_normal(((size + 1) // 2, beta.dim))
        centers = beta.centers[index]
        return np.concatenate([centers + noise, centers - noise])[:size]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.concatenate(list(pool.map(draw, zip(streams, sizes))))


def _linear_guess(cloud: np.ndarray, cloud_weights: np.ndarray, nu: DiscreteMeasure) -> Tuple[np.ndarray, float]:
    # potentials of the affine map z -> c + a z, read as nearest atom in the rescaled cloud
    bary_cloud = cloud_weights @ cloud
    bary_nu = nu.weights @ nu.points
    spread_cloud = cloud_weights @ np.sum((cloud - bary_cloud) ** 2, axis=1)
    spread_nu = nu.weights @ np.sum((nu.points - bary_nu) ** 2, axis=1)
    a = np.sqrt(spread_nu / spread_cloud) if spread_cloud > 0 and spread_nu > 0 else 1.0
    c = bary_nu - a * bary_cloud
    return (np.sum(nu.points ** 2, axis=1) - 2.0 * nu.points @ c) / (2.0 * a), a


def balance(cloud: np.ndarray, cloud_weights: np.ndarray, nu: DiscreteMeasure, tol_mass: float = TOL_MASS,
            max_iter: int = MAX_ITER, psi0: Optional[np.ndarray] = None, workers: int = 1) -> DualWeights:
    """
    Balance the Laguerre cell masses of a weighted cloud against nu.

    Runs preconditioned subgradient descent on the dual, psi_j += eta_k (m_j - nu_j) / nu_j with
    eta_k = eta_0 / sqrt(k), alongside the running average of the iterates; the best iterate seen is kept.

    Args:
        cloud (np.ndarray): Source points, shape (N, d).
        cloud_weights (np.ndarray): Source probabilities, shape (N,).
        nu (DiscreteMeasure): Discrete target.
        tol_mass (float): Allowed per-cell mass deviation.
        max_iter (int): Iteration budget.
        psi0 (Optional[np.ndarray]): Warm start.
        workers (int): Threads used for the cell assignment.

    Returns:
        DualWeights: Balanced potentials.

    Raises:
        NoConvergence: If the per-cell deviation stays above tol_mass.
    """
    if len(nu) > MAX_TARGET_ATOMS:
        log.error(f"Target has {len(nu)} atoms, more than {MAX_TARGET_ATOMS}.")
        raise SemiDiscreteError(f"Target has {len(nu)} atoms, more than {MAX_TARGET_ATOMS}")

    guess, scale = _linear_guess(cloud, cloud_weights, nu)
    psi = np.array(psi0 if psi0 is not None else guess, dtype=float)
    dual = DualWeights(psi=psi - psi[0], target=nu)
    if len(nu) == 1:
        return dual.with_psi(np.zeros(1), 0.0, 0.0, 0)

    spacing = cdist(nu.points, nu.points)
    np.fill_diagonal(spacing, np.inf)
    nearest = spacing.min(axis=1)
    nearest = nearest[nearest > 0]
    eta0 = 0.5 * (float(np.median(nearest)) if len(nearest) else 1.0) ** 2 / scale

    average = np.zeros_like(psi)
    best, best_residual, best_l1 = psi.copy(), np.inf, np.inf
    for k in range(1, max_iter + 1):
        for candidate in (psi, average) if k % 25 == 0 else (psi,):
            deviation = DualWeights(psi=candidate, target=nu).masses(cloud, cloud_weights, workers) - nu.weights
            residual = float(np.abs(deviation).max())
            if residual < best_residual:
                best, best_residual, best_l1 = candidate.copy(), residual, float(np.abs(deviation).sum())
            if candidate is psi:
                step = deviation
        if best_residual <= tol_mass:
            break
        psi = psi + eta0 / np.sqrt(k) * step / nu.weights
        psi -= psi[0]
        average += (psi - average) / k

    log.debug(f"Balanced {len(nu)} cells in {k} iterations, residual {best_residual:.3e}.")
    if best_residual > tol_mass:
        log.error(f"Cell masses did not balance: residual {best_residual:.3e} > {tol_mass:.3e}.")
        raise NoConvergence(f"Cell masses did not balance within {max_iter} iterations", residual=best_residual)
    return dual.with_psi(best, best_residual, best_l1, k)


def solve_potentials(beta: SmoothedLaw, nu: DiscreteMeasure, mc_samples: int = 1 << 16, seed: int = 0,
                     tol_mass: float = TOL_MASS, workers: int = 1, max_iter: int = MAX_ITER) -> DualWeights:
    """
    Semi-discrete Brenier potentials from the smoothed law beta onto nu, balanced on a seeded sample of beta.
    """
    cloud = sample_cloud(beta, mc_samples, seed, workers)
    weights = np.full(len(cloud), 1.0 / len(cloud))
    dual = balance(cloud, weights, nu, tol_mass=tol_mass, max_iter=max_iter, workers=workers)
    log.info(f"Solved {len(nu)} dual potentials on {len(cloud)} samples: per-cell residual {dual.residual:.3e}, "
             f"L1 residual {dual.residual_l1:.3e}.")
    return dual
