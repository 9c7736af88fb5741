import logging
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.special import ndtr, ndtri

from bassflow.common.errors import (DensityRequired, QuantileUndefined,
                                    SpecError, UnsupportedDimension,
                                    WeightSumMismatch)
from bassflow.measures.discrete import DiscreteMeasure, validate

log = logging.getLogger(__name__)

U_MIN: float = 1e-16
BISECTION_STEPS: int = 96
DENSITY_GRID: int = 1024
SQRT_2PI: float = np.sqrt(2.0 * np.pi)


def clamp_probability(u):
    return np.clip(u, U_MIN, 1.0 - U_MIN)


class MarginalSpec(ABC):
    """
    A target or source marginal on the real line, parametric or empirical.

    Subclasses provide the quantile function Q, the cdf and, where defined, the density. Quantiles are
    evaluated from whichever tail is more accurate: `transport(lower, upper)` returns Q(u) for
    u = lower = 1 - upper, using `quantile(lower)` below the median and `upper_quantile(upper)` above.
    """
    dim: int = 1
    is_discrete: bool = False
    has_density: bool = True

    @abstractmethod
    def quantile(self, u: np.ndarray) -> np.ndarray:
        """Q(u) for u in (0, 1); u is clamped to [1e-16, 1 - 1e-16]."""

    @abstractmethod
    def cdf(self, x: np.ndarray) -> np.ndarray:
        """F(x) = P(Y <= x)."""

    @abstractmethod
    def truncated_mean(self, a: float, b: float) -> float:
        """The integral of y over a < y <= b."""

    @abstractmethod
    def support(self) -> Tuple[float, float]:
        """Endpoints of the convex hull of the support (possibly infinite)."""

    @abstractmethod
    def mean(self) -> float:
        pass

    @abstractmethod
    def second_moment(self) -> float:
        pass

    @abstractmethod
    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        pass

    @abstractmethod
    def describe(self) -> str:
        pass

    def sf(self, x: np.ndarray) -> np.ndarray:
        return 1.0 - self.cdf(x)

    def upper_quantile(self, s: np.ndarray) -> np.ndarray:
        """Q(1 - s)."""
        return self.quantile(1.0 - np.asarray(s, dtype=float))

    def transport(self, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
        """
        Q(u) for u given by its lower tail `lower` and upper tail `upper = 1 - u`.

        Args:
            lower (np.ndarray): Probabilities u.
            upper (np.ndarray): Complementary probabilities 1 - u, computed independently for accuracy.

        Returns:
            np.ndarray: Quantile values with the shape of `lower`.
        """
        shape = np.shape(lower)
        lower = clamp_probability(np.asarray(lower, dtype=float).reshape(-1))
        upper = clamp_probability(np.asarray(upper, dtype=float).reshape(-1))
        use_lower = lower <= 0.5

        out = np.empty_like(lower)
        out[use_lower] = self.quantile(lower[use_lower])
        out[~use_lower] = self.upper_quantile(upper[~use_lower])
        return out.reshape(shape)

    def density(self, x: np.ndarray) -> np.ndarray:
        log.error(f"{self.describe()} has no density")
        raise DensityRequired(f"{self.describe()} has no density")

    def density_bounds(self) -> Tuple[float, float]:
        """
        Essential infimum of the density over the interior of the support and its supremum.
        """
        log.error(f"{self.describe()} has no density")
        raise DensityRequired(f"{self.describe()} has no density")

    def quantile_derivative(self, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
        """
        Left derivative of Q at u = lower = 1 - upper, i.e. 1 / density(Q(u)).
        """
        if not self.has_density:
            log.error(f"{self.describe()} has no density")
            raise DensityRequired(f"{self.describe()} has no density")
        with np.errstate(divide='ignore'):
            return 1.0 / self.density(self.transport(lower, upper))

    def first_moment_below(self, x: np.ndarray) -> np.ndarray:
        """E[Y; Y <= x], elementwise."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.array([self.truncated_mean(-np.inf, xi) for xi in x])

    def partial_means(self, breaks: np.ndarray) -> np.ndarray:
        """
        Integrals of Q over consecutive intervals (breaks[k], breaks[k + 1]) of (0, 1).
        """
        u = np.clip(np.asarray(breaks, dtype=float), 0.0, 1.0)
        inner = (u > 0.0) & (u < 1.0)
        below = np.where(u >= 1.0, self.mean(), 0.0)
        below[inner] = self.first_moment_below(self.transport(u[inner], 1.0 - u[inner]))
        return np.diff(below)

    def potential(self, x: np.ndarray) -> np.ndarray:
        """
        u(x) = E|x - Y|, computed from the cdf and the truncated first moment.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return x * (2.0 * self.cdf(x) - 1.0) + self.mean() - 2.0 * self.first_moment_below(x)

    def knots(self) -> np.ndarray:
        """Points where the cdf is not smooth (finite support endpoints, atoms)."""
        lo, hi = self.support()
        return np.array([v for v in (lo, hi) if np.isfinite(v)])

    def effective_support(self, tail: float = 1e-9) -> Tuple[float, float]:
        """
        Support endpoints, replaced by the tail quantiles when infinite.
        """
        lo, hi = self.support()
        if not np.isfinite(lo):
            lo = float(self.quantile(np.array([tail]))[0])
        if not np.isfinite(hi):
            hi = float(self.upper_quantile(np.array([tail]))[0])
        return lo, hi

    def discretize(self, n: int) -> DiscreteMeasure:
        """
        Quantile-midpoint discretisation with atoms Q((i - 1/2) / n), i = 1..n, and equal weights.
        """
        u = (np.arange(1, n + 1) - 0.5) / n
        atoms = self.transport(u, 1.0 - u)
        log.info(f"Discretised {self.describe()} into {n} quantile midpoints.")
        return validate(atoms, np.full(n, 1.0 / n), 1)


@dataclass(frozen=True)
class GaussianMarginal(MarginalSpec):
    loc: float
    stdev: float

    def __post_init__(self):
        if not self.stdev > 0:
            raise SpecError(f"Gaussian stdev must be positive, got {self.stdev}")

    def quantile(self, u):
        return self.loc + self.stdev * ndtri(clamp_probability(np.asarray(u, dtype=float)))

    def upper_quantile(self, s):
        return self.loc - self.stdev * ndtri(clamp_probability(np.asarray(s, dtype=float)))

    def cdf(self, x):
        return ndtr((np.asarray(x, dtype=float) - self.loc) / self.stdev)

    def sf(self, x):
        return ndtr((self.loc - np.asarray(x, dtype=float)) / self.stdev)

    def density(self, x):
        t = (np.asarray(x, dtype=float) - self.loc) / self.stdev
        return np.exp(-0.5 * t * t) / (self.stdev * SQRT_2PI)

    def density_bounds(self):
        return 0.0, 1.0 / (self.stdev * SQRT_2PI)

    def truncated_mean(self, a, b):
        alpha = (a - self.loc) / self.stdev
        beta = (b - self.loc) / self.stdev
        mass = ndtr(beta) - ndtr(alpha)
        return float(self.loc * mass - self.stdev * (np.exp(-0.5 * beta * beta) - np.exp(-0.5 * alpha * alpha)) / SQRT_2PI)

    def first_moment_below(self, x):
        t = (np.asarray(x, dtype=float) - self.loc) / self.stdev
        return self.loc * ndtr(t) - self.stdev * np.exp(-0.5 * t * t) / SQRT_2PI

    def partial_means(self, breaks):
        u = np.clip(np.asarray(breaks, dtype=float), 0.0, 1.0)
        inner = (u > 0.0) & (u < 1.0)
        density = np.zeros_like(u)
        density[inner] = np.exp(-0.5 * ndtri(u[inner]) ** 2) / SQRT_2PI
        return self.loc * np.diff(u) - self.stdev * np.diff(density)

    def support(self):
        return -np.inf, np.inf

    def mean(self):
        return self.loc

    def second_moment(self):
        return self.loc ** 2 + self.stdev ** 2

    def sample(self, n, rng):
        return rng.normal(self.loc, self.stdev, size=n)

    def describe(self):
        return f"gaussian:{self.loc!r},{self.stdev!r}"


@dataclass(frozen=True)
class UniformMarginal(MarginalSpec):
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise SpecError(f"Uniform marginal needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def quantile(self, u):
        return self.lo + self.width * clamp_probability(np.asarray(u, dtype=float))

    def upper_quantile(self, s):
        return self.hi - self.width * clamp_probability(np.asarray(s, dtype=float))

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.lo) / self.width, 0.0, 1.0)

    def sf(self, x):
        return np.clip((self.hi - np.asarray(x, dtype=float)) / self.width, 0.0, 1.0)

    def density(self, x):
        # half-open (lo, hi] so that Q' is the left derivative at the kinks
        x = np.asarray(x, dtype=float)
        return np.where((x > self.lo) & (x <= self.hi), 1.0 / self.width, 0.0)

    def quantile_derivative(self, lower, upper):
        return np.full(np.shape(lower), self.width)

    def density_bounds(self):
        return 1.0 / self.width, 1.0 / self.width

    def truncated_mean(self, a, b):
        a, b = max(a, self.lo), min(b, self.hi)
        if b <= a:
            return 0.0
        return (b * b - a * a) / (2.0 * self.width)

    def first_moment_below(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        return (x * x - self.lo * self.lo) / (2.0 * self.width)

    def partial_means(self, breaks):
        u = np.clip(np.asarray(breaks, dtype=float), 0.0, 1.0)
        return self.lo * np.diff(u) + 0.5 * self.width * np.diff(u * u)

    def support(self):
        return self.lo, self.hi

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def second_moment(self):
        return (self.lo ** 2 + self.lo * self.hi + self.hi ** 2) / 3.0

    def sample(self, n, rng):
        return rng.uniform(self.lo, self.hi, size=n)

    def describe(self):
        return f"uniform:{self.lo!r},{self.hi!r}"


@dataclass(frozen=True, eq=False)
class EmpiricalMarginal(MarginalSpec):
    """
    A discrete marginal. One-dimensional operations use the left-continuous step quantile
    Q(u) = inf{x : F(x) >= u}; clouds in d >= 2 only expose the underlying measure.
    """
    measure: DiscreteMeasure
    is_discrete = True
    has_density = False

    def __post_init__(self):
        object.__setattr__(self, 'dim', self.measure.dim)
        if self.measure.dim == 1:
            ordered = self.measure.sorted()
            object.__setattr__(self, '_atoms', ordered.values)
            tail = np.cumsum(ordered.weights[::-1])[::-1]
            object.__setattr__(self, '_weights', ordered.weights)
            object.__setattr__(self, '_cumulative', np.cumsum(ordered.weights))
            object.__setattr__(self, '_above', np.concatenate([tail[1:], [0.0]]))

    def _require_1d(self):
        if self.dim != 1:
            log.error(f"Operation needs a one-dimensional marginal, got dim={self.dim}")
            raise UnsupportedDimension(f"Operation needs a one-dimensional marginal, got dim={self.dim}")

    def quantile(self, u):
        self._require_1d()
        if len(self._atoms) == 0:
            log.error("Empirical marginal without atoms")
            raise QuantileUndefined("Empirical marginal without atoms")
        u = clamp_probability(np.asarray(u, dtype=float))
        index = np.searchsorted(self._cumulative, u, side='left')
        return self._atoms[np.clip(index, 0, len(self._atoms) - 1)]

    def upper_quantile(self, s):
        self._require_1d()
        s = clamp_probability(np.asarray(s, dtype=float))
        # Q(1 - s) without forming 1 - s: first atom with at most s of the mass strictly above it
        index = np.searchsorted(-self._above, -s, side='left')
        return self._atoms[np.clip(index, 0, len(self._atoms) - 1)]

    def cdf(self, x):
        self._require_1d()
        index = np.searchsorted(self._atoms, np.asarray(x, dtype=float), side='right')
        return np.concatenate([[0.0], self._cumulative])[index].clip(0.0, 1.0)

    def truncated_mean(self, a, b):
        self._require_1d()
        mask = (self._atoms > a) & (self._atoms <= b)
        return float(np.sum(self._weights[mask] * self._atoms[mask]))

    def potential(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.abs(x[:, None] - self.measure.values[None, :]) @ self.measure.weights

    def knots(self):
        self._require_1d()
        return np.unique(self._atoms)

    def support(self):
        self._require_1d()
        return float(self._atoms[0]), float(self._atoms[-1])

    def mean(self):
        self._require_1d()
        return float(self.measure.weights @ self.measure.values)

    def second_moment(self):
        return float(self.measure.weights @ np.sum(self.measure.points ** 2, axis=1))

    def sample(self, n, rng):
        index = rng.choice(len(self.measure), size=n, p=self.measure.weights)
        points = self.measure.points[index]
        return points[:, 0] if self.dim == 1 else points

    def discretize(self, n):
        return self.measure

    def describe(self):
        return f"empirical({len(self.measure)} atoms, dim={self.dim})"


@dataclass(frozen=True)
class MixtureMarginal(MarginalSpec):
    """
    Finite mixture of parametric marginals. Quantiles are found by vectorised bisection inside the
    bracket spanned by the component quantiles at the same level.
    """
    components: Tuple[Tuple[float, MarginalSpec], ...]

    def __post_init__(self):
        if not self.components:
            raise SpecError("A mixture needs at least one component")
        total = sum(weight for weight, _ in self.components)
        if abs(total - 1.0) >= 1e-9:
            raise WeightSumMismatch(f"Mixture weights sum to {total}, expected 1")
        for weight, component in self.components:
            if weight <= 0:
                raise SpecError(f"Mixture weight must be positive, got {weight}")
            if component.is_discrete:
                raise SpecError("Mixture components must be parametric; mixtures of Diracs are empirical")

    @property
    def weights(self) -> np.ndarray:
        return np.array([weight for weight, _ in self.components])

    def _combine(self, method: str, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return sum(weight * getattr(component, method)(x) for weight, component in self.components)

    def cdf(self, x):
        return self._combine('cdf', x)

    def sf(self, x):
        return self._combine('sf', x)

    def density(self, x):
        return self._combine('density', x)

    def _bisect(self, target: np.ndarray, tail: str) -> np.ndarray:
        if tail == 'lower':
            brackets = np.stack([c.quantile(target) for _, c in self.components])
            below = lambda x: self.cdf(x) < target
        else:
            brackets = np.stack([c.upper_quantile(target) for _, c in self.components])
            below = lambda x: self.sf(x) > target
        lo, hi = brackets.min(axis=0), brackets.max(axis=0)
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            go_right = below(mid)
            lo = np.where(go_right, mid, lo)
            hi = np.where(go_right, hi, mid)
        return hi

    def quantile(self, u):
        return self._bisect(clamp_probability(np.asarray(u, dtype=float)), 'lower')

    def upper_quantile(self, s):
        return self._bisect(clamp_probability(np.asarray(s, dtype=float)), 'upper')

    def density_bounds(self):
        upper = float(sum(weight * component.density_bounds()[1] for weight, component in self.components))
        lo, hi = self.support()
        if not (np.isfinite(lo) and np.isfinite(hi)):
            return 0.0, upper
        grid = np.linspace(lo, hi, DENSITY_GRID + 2)[1:-1]
        return float(self.density(grid).min()), upper

    def truncated_mean(self, a, b):
        return float(sum(weight * component.truncated_mean(a, b) for weight, component in self.components))

    def first_moment_below(self, x):
        return self._combine('first_moment_below', x)

    def knots(self):
        return np.unique(np.concatenate([component.knots() for _, component in self.components]))

    def support(self):
        bounds = np.array([component.support() for _, component in self.components])
        return float(bounds[:, 0].min()), float(bounds[:, 1].max())

    def mean(self):
        return float(sum(weight * component.mean() for weight, component in self.components))

    def second_moment(self):
        return float(sum(weight * component.second_moment() for weight, component in self.components))

    def sample(self, n, rng):
        labels = rng.choice(len(self.components), size=n, p=self.weights / self.weights.sum())
        out = np.empty(n)
        for index, (_, component) in enumerate(self.components):
            mask = labels == index
            out[mask] = component.sample(int(mask.sum()), rng)
        return out

    def describe(self):
        return 'mix:' + '+'.join(f"{weight!r}*{component.describe()}" for weight, component in self.components)


def as_marginal(obj) -> MarginalSpec:
    """
    Wrap discrete measures and smoothed laws so that every measure-level operation sees a MarginalSpec.
    """
    if isinstance(obj, MarginalSpec):
        return obj
    if isinstance(obj, DiscreteMeasure):
        return EmpiricalMarginal(obj)
    if hasattr(obj, 'as_marginal'):
        return obj.as_marginal()
    raise TypeError(f"Cannot interpret {type(obj).__name__} as a marginal")


_MIX_SPLIT = re.compile(r'\+(?=\s*[0-9.eE+-]+\s*\*)')


def _numbers(text: str, count: int, kind: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(',')]
    except ValueError as e:
        raise SpecError(f"Malformed {kind} parameters '{text}'") from e
    if len(values) != count:
        raise SpecError(f"{kind} expects {count} parameters, got '{text}'")
    return values


def parse_marginal(text: str, reader: Optional[Callable[[str], DiscreteMeasure]] = None) -> MarginalSpec:
    """
    Parse the marginal grammar used on the command line.

    ``gaussian:m,s | uniform:a,b | dirac:x | mix:w1*spec1+w2*spec2 | csv:<path>``

    Args:
        text (str): The marginal declaration.
        reader (Optional[Callable[[str], DiscreteMeasure]]): Loader used for ``csv:`` declarations.

    Returns:
        MarginalSpec: The parsed marginal.

    Raises:
        SpecError: On unknown kinds or malformed parameters.
    """
    text = text.strip()
    kind, _, body = text.partition(':')
    kind = kind.lower()

    if kind == 'gaussian':
        loc, stdev = _numbers(body, 2, kind)
        return GaussianMarginal(loc, stdev)
    if kind == 'uniform':
        lo, hi = _numbers(body, 2, kind)
        return UniformMarginal(lo, hi)
    if kind == 'dirac':
        (x,) = _numbers(body, 1, kind)
        return EmpiricalMarginal(validate([x], [1.0], 1))
    if kind == 'csv':
        if reader is None:
            raise SpecError("No CSV reader available for csv: marginals")
        return EmpiricalMarginal(reader(body))
    if kind == 'mix':
        components = []
        for part in _MIX_SPLIT.split(body):
            weight, star, spec = part.partition('*')
            if not star:
                raise SpecError(f"Mixture component '{part}' must read weight*spec")
            components.append((_numbers(weight, 1, 'mixture weight')[0], parse_marginal(spec, reader)))
        return _build_mixture(components)

    raise SpecError(f"Unknown marginal kind '{kind}' in '{text}'")


def _build_mixture(components: List[Tuple[float, MarginalSpec]]) -> MarginalSpec:
    discrete = [component.is_discrete for _, component in components]
    if all(discrete):
        points = np.concatenate([component.measure.values for _, component in components])
        weights = np.concatenate([weight * component.measure.weights for weight, component in components])
        return EmpiricalMarginal(validate(points, weights, 1))
    if any(discrete):
        raise SpecError("Mixtures cannot combine discrete and parametric components")
    return MixtureMarginal(tuple(components))


def gaussian_mixture(centers: np.ndarray, weights: np.ndarray, variance: float = 1.0) -> MixtureMarginal:
    """
    The law sum_i w_i N(z_i, variance) as a marginal.
    """
    stdev = float(np.sqrt(variance))
    return MixtureMarginal(tuple((float(w), GaussianMarginal(float(z), stdev)) for z, w in zip(centers, weights)))

