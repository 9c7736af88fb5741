import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import softmax

from bassflow.common.errors import (DegenerateKernel, MeanNotZero,
                                    UnsupportedDimension, ZeroDirection)
from bassflow.common.quadrature import QuadratureRule
from bassflow.lifted.state import Direction, LiftedState
from bassflow.measures.discrete import DiscreteMeasure
from bassflow.measures.marginals import MarginalSpec
from bassflow.measures.smoothing import SmoothedLaw
from bassflow.transport.ot1d import BrenierMap1D
from bassflow.transport.semidiscrete import TOL_MASS, balance

log = logging.getLogger(__name__)

MEAN_ZERO_TOL: float = 1e-10


@dataclass(frozen=True)
class Evaluation:
    value: float
    gradient: Direction


class BassFunctional:
    """
    The lifted Bass functional on the line,

        V(Z) = E[(Z + G) T(Z + G)] - E[Z X],

    where T = Q_nu o F is the Brenier map from L(Z) * gamma_1 onto nu and every expectation over the
    Gaussian G uses the shared quadrature rule. The maximal-covariance term is read off the comonotone
    coupling, so no supremum is ever solved.

    Attributes:
        nu (MarginalSpec): Target marginal.
        rule (QuadratureRule): Gauss-Hermite rule for G.
    """

    def __init__(self, nu: MarginalSpec, rule: Optional[QuadratureRule] = None):
        self.nu = nu
        self.rule = rule or QuadratureRule()

    def _require_line(self, s: LiftedState):
        if s.dim != 1:
            log.error(f"Closed-form functional called on a state of dimension {s.dim}.")
            raise UnsupportedDimension(f"BassFunctional needs dim=1, got {s.dim}; use SemiDiscreteBassFunctional")

    def brenier(self, z: np.ndarray, w: np.ndarray) -> BrenierMap1D:
        source = SmoothedLaw(centers=np.asarray(z, dtype=float).reshape(-1, 1), weights=np.asarray(w), dim=1)
        return BrenierMap1D(source=source, target=self.nu)

    def nodes(self, z: np.ndarray) -> np.ndarray:
        """The points z_i + g_k, shape (n, order)."""
        return np.asarray(z, dtype=float)[:, None] + self.rule.nodes[None, :]

    def pushforward_term(self, z: np.ndarray, w: np.ndarray) -> float:
        """
        MCov(L(Z) * gamma_1, nu) = E[(Z + G) T(Z + G)]; depends on the law of Z only.
        """
        zeta = self.nodes(z)
        return float(w @ self.rule.expect(zeta * self.brenier(z, w)(zeta)))

    def evaluate(self, s: LiftedState) -> Evaluation:
        """
        Value and gradient from a single pass over the quadrature nodes.
        """
        self._require_line(s)
        zeta = self.nodes(s.zv)
        mapped = self.brenier(s.zv, s.w)(zeta)
        value = float(s.w @ self.rule.expect(zeta * mapped) - s.w @ (s.zv * s.xv))
        return Evaluation(value=value, gradient=Direction(self.rule.expect(mapped) - s.xv))

    def value(self, s: LiftedState) -> float:
        return self.evaluate(s).value

    def gradient(self, s: LiftedState) -> Direction:
        return self.evaluate(s).gradient

    def conditional_expectation(self, s: LiftedState, d: Direction, zeta) -> np.ndarray:
        """
        E[dZ | Z + G = zeta] = sum_i w_i phi(zeta - z_i) dz_i / sum_i w_i phi(zeta - z_i), in log space.

        Raises:
            DegenerateKernel: If the posterior weights cannot be normalised.
        """
        self._require_line(s)
        source = SmoothedLaw(centers=s.z, weights=s.w, dim=1)
        posterior = softmax(source.log_kernel(zeta), axis=-1)
        out = posterior @ d.values
        if not np.all(np.isfinite(out)):
            log.error("Posterior weights of the conditional expectation are degenerate.")
            raise DegenerateKernel("Posterior weights of the conditional expectation are degenerate")
        return out

    def _second_order(self, s: LiftedState, d: Direction):
        self._require_line(s)
        zeta = self.nodes(s.zv)
        hessian = self.brenier(s.zv, s.w).hessian(zeta)
        residual = d.values[:, None] - self.conditional_expectation(s, d, zeta)
        return hessian, residual

    def hessian_quadratic_form(self, s: LiftedState, d: Direction) -> float:
        """
        d^2/dt^2 V(Z + t dZ) at t = 0, i.e. E[(dZ - E[dZ | Z + G])^2 T'(Z + G)].
        """
        hessian, residual = self._second_order(s, d)
        return float(s.w @ self.rule.expect(hessian * residual ** 2))

    def grad_time_derivative(self, s: LiftedState, d: Direction) -> Direction:
        """
        d/dt of the gradient along Z + t dZ: per atom E[T'(z_i + G)(dz_i - E[dZ | z_i + G])].
        """
        hessian, residual = self._second_order(s, d)
        return Direction(self.rule.expect(hessian * residual))

    def contraction_factor(self, s: LiftedState, d: Direction) -> float:
        """
        ||E[dZ | Z + G]||^2 / ||dZ||^2 for a mean-zero direction.

        Raises:
            MeanNotZero: If sum_i w_i dz_i is not zero.
            ZeroDirection: If dZ vanishes.
        """
        mean = float(s.w @ d.values)
        if abs(mean) > MEAN_ZERO_TOL:
            log.error(f"Contraction factor needs a mean-zero direction, got mean {mean:.3e}.")
            raise MeanNotZero(f"Direction has mean {mean:.3e}")
        total = float(s.w @ d.values ** 2)
        if total == 0.0:
            log.error("Contraction factor of a zero direction is undefined.")
            raise ZeroDirection("Direction is zero")
        conditional = self.conditional_expectation(s, d, self.nodes(s.zv))
        return float(s.w @ self.rule.expect(conditional ** 2)) / total


class SemiDiscreteBassFunctional:
    """
    The lifted Bass functional in d >= 2 against a discrete target.

    Each atom carries a fixed antithetic sample of Gaussian increments (common random numbers), so value and
    gradient are deterministic functions of Z. The cloud {z_i + g_ik} with weights w_i / K plays the role
    of the smoothed law; its Laguerre cells are balanced against nu, warm-started from the previous call,
    and the value is the dual objective.

    Attributes:
        nu (DiscreteMeasure): Discrete target.
        samples_per_atom (int): K, the number of Gaussian increments per atom.
        seed (int): Seed of the increments.
        tol_mass (float): Per-cell mass tolerance of the balancing.
        workers (int): Threads used for cell assignment.
    """

    def __init__(self, nu: DiscreteMeasure, samples_per_atom: int = 128, seed: int = 0,
                 tol_mass: Optional[float] = None, workers: int = 1):
        self.nu = nu
        self.samples_per_atom = samples_per_atom
        self.seed = seed
        self.tol_mass = tol_mass if tol_mass is not None else min(TOL_MASS, 0.25 / len(nu))
        self.workers = workers
        self._noise = None
        self._psi = None

    def noise(self, n: int) -> np.ndarray:
        if self._noise is None or len(self._noise) != n:
            rng = np.random.default_rng(self.seed)
            half = rng.standard_normal((n, (self.samples_per_atom + 1) // 2, self.nu.dim))
            self._noise = np.concatenate([half, -half], axis=1)[:, :self.samples_per_atom]
        return self._noise

    def evaluate(self, s: LiftedState) -> Evaluation:
        if s.dim != self.nu.dim:
            log.error(f"State of dimension {s.dim} against a target of dimension {self.nu.dim}.")
            raise UnsupportedDimension(f"State has dim {s.dim}, target has dim {self.nu.dim}")

        n, k = len(s), self.samples_per_atom
        cloud = (s.z[:, None, :] + self.noise(n)).reshape(n * k, s.dim)
        cloud_weights = np.repeat(s.w / k, k)

        dual = balance(cloud, cloud_weights, self.nu, tol_mass=self.tol_mass, psi0=self._psi, workers=self.workers)
        self._psi = dual.psi

        index = dual.assign(cloud, self.workers)
        mapped = self.nu.points[index]
        scores = np.sum(cloud * mapped, axis=1) - dual.psi[index]
        mcov_term = float(cloud_weights @ scores + dual.psi @ self.nu.weights)
        value = mcov_term - float(s.w @ np.sum(s.z * s.x, axis=1))
        gradient = mapped.reshape(n, k, s.dim).mean(axis=1) - s.x
        return Evaluation(value=value, gradient=Direction(gradient))

    def value(self, s: LiftedState) -> float:
        return self.evaluate(s).value

    def gradient(self, s: LiftedState) -> Direction:
        return self.evaluate(s).gradient


def bass_value(s: LiftedState, nu: MarginalSpec, rule: Optional[QuadratureRule] = None) -> float:
    return BassFunctional(nu, rule).value(s)


def gradient(s: LiftedState, nu: MarginalSpec, rule: Optional[QuadratureRule] = None) -> Direction:
    return BassFunctional(nu, rule).gradient(s)


def conditional_expectation(s: LiftedState, d: Direction, zeta) -> np.ndarray:
    # the kernel does not involve the target
    return BassFunctional(nu=None).conditional_expectation(s, d, zeta)


def hessian_quadratic_form(s: LiftedState, d: Direction, nu: MarginalSpec,
                           rule: Optional[QuadratureRule] = None) -> float:
    return BassFunctional(nu, rule).hessian_quadratic_form(s, d)


def grad_time_derivative(s: LiftedState, d: Direction, nu: MarginalSpec,
                         rule: Optional[QuadratureRule] = None) -> Direction:
    return BassFunctional(nu, rule).grad_time_derivative(s, d)


def contraction_factor(s: LiftedState, d: Direction, rule: Optional[QuadratureRule] = None) -> float:
    return BassFunctional(nu=None, rule=rule).contraction_factor(s, d)
