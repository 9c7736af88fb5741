import logging
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Tuple, Union

import numpy as np
from scipy.stats import kstest

from bassflow.common.errors import MartingaleError, TooFewPaths
from bassflow.martingale.simulate import MartingalePaths
from bassflow.measures.coupling import wasserstein2_1d
from bassflow.measures.discrete import DiscreteMeasure, uniform
from bassflow.measures.marginals import MarginalSpec, as_marginal

log = logging.getLogger(__name__)

MIN_PATHS: int = 10_000
N_BINS: int = 20
KS_CRITICAL: float = 1.63
SE_MULTIPLE: float = 3.0

Measure = Union[DiscreteMeasure, MarginalSpec]


@dataclass(frozen=True)
class MarginalVerdict:
    t: float
    ks: float
    w2: float
    ks_bound: float

    @property
    def passed(self) -> bool:
        return self.ks <= self.ks_bound

    def to_dict(self) -> dict:
        return {**asdict(self), "passed": self.passed}


@dataclass(frozen=True)
class MartingaleVerdict:
    """
    Largest binned deviation |E[M_t - M_s | bin of M_s]| over all pairs and bins.

    Attributes:
        residual (float): The largest deviation.
        se (float): Largest standard error of a bin mean.
        z_max (float): Largest deviation measured in its own bin's standard errors.

    Passes when the residual is within 3 bin standard errors.
    """
    residual: float
    se: float
    z_max: float

    @property
    def passed(self) -> bool:
        return self.residual <= SE_MULTIPLE * self.se

    def to_dict(self) -> dict:
        return {**asdict(self), "passed": self.passed}


@dataclass(frozen=True)
class DualityGap:
    p_hat: float
    gap: float
    se: float
    mt_hat: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.gap <= SE_MULTIPLE * self.se

    def to_dict(self) -> dict:
        return {**asdict(self), "passed": self.passed}


def _ks_discrete(values: np.ndarray, target: DiscreteMeasure) -> float:
    """
    sup |F_n - F| between the empirical cdf and a step cdf, checked on both sides of every jump.
    """
    target = target.sorted()
    values = np.sort(values)
    cumulative = np.concatenate([[0.0], np.cumsum(target.weights)])
    points = np.union1d(values, target.values)

    worst = 0.0
    for side in ('right', 'left'):
        empirical = np.searchsorted(values, points, side=side) / len(values)
        exact = cumulative[np.searchsorted(target.values, points, side=side)]
        worst = max(worst, float(np.max(np.abs(empirical - exact))))
    return worst


def marginal_check(paths: MartingalePaths, t: float, target: Measure) -> MarginalVerdict:
    """
    Kolmogorov-Smirnov and W2 distances between the empirical law of M_t and a target marginal.

    Raises:
        TimeNotOnGrid: If t is not a simulation time.
    """
    values = paths.at(t)
    target = as_marginal(target)

    if target.is_discrete:
        ks = _ks_discrete(values, target.measure)
    else:
        ks = float(kstest(values, target.cdf).statistic)
    w2 = wasserstein2_1d(uniform(values), target)

    verdict = MarginalVerdict(t=float(t), ks=ks, w2=w2, ks_bound=KS_CRITICAL / np.sqrt(len(values)))
    log.info(f"Marginal at t={t}: KS={ks:.4g} (bound {verdict.ks_bound:.4g}), W2={w2:.4g} "
             f"against {target.describe()}.")
    return verdict


def martingale_check(paths: MartingalePaths, t_pairs: Iterable[Tuple[float, float]],
                     bins: int = N_BINS) -> MartingaleVerdict:
    """
    Binned test of E[M_t | M_s] = M_s.

    For each pair s < t the paths are sorted by M_s and split into `bins` groups of equal count; within each
    group the mean increment M_t - M_s must vanish.

    Raises:
        TooFewPaths: With fewer than 10^4 paths.
    """
    if paths.n_paths < MIN_PATHS:
        log.error(f"Martingale check needs {MIN_PATHS} paths, got {paths.n_paths}.")
        raise TooFewPaths(f"Martingale check needs at least {MIN_PATHS} paths, got {paths.n_paths}")

    residual, se, z_max = 0.0, 0.0, 0.0
    for s, t in t_pairs:
        if not s < t:
            log.error(f"Time pairs must satisfy s < t, got ({s}, {t})")
            raise MartingaleError(f"Time pairs must satisfy s < t, got ({s}, {t})")
        m_s, m_t = paths.at(s), paths.at(t)

        for group in np.array_split(np.argsort(m_s, kind='stable'), bins):
            increments = m_t[group] - m_s[group]
            deviation = abs(float(increments.mean()))
            error = float(increments.std(ddof=1) / np.sqrt(len(group))) if len(group) > 1 else 0.0
            residual, se = max(residual, deviation), max(se, error)
            if deviation > 0.0:
                z_max = max(z_max, deviation / error if error > 0.0 else np.inf)

    log.info(f"Martingale residual {residual:.3e} with bin standard error {se:.3e} (z_max={z_max:.2f}).")
    return MartingaleVerdict(residual=residual, se=se, z_max=float(z_max))


def mt_value(p: float, mu: Measure, nu: Measure) -> float:
    """
    Martingale Benamou-Brenier cost -2 P + E_nu|y|^2 - E_mu|x|^2 + d recovered from the value P.
    """
    mu, nu = as_marginal(mu), as_marginal(nu)
    return float(-2.0 * p + nu.second_moment() - mu.second_moment() + nu.dim)


def duality_gap(paths: MartingalePaths, v_value: float, mu: Optional[Measure] = None,
                nu: Optional[Measure] = None) -> DualityGap:
    """
    Compare the Monte-Carlo estimate of E[M_1 B_1 - M_0 B_0] with the value of the Bass functional.

    Args:
        paths (MartingalePaths): Paths carrying both M and B.
        v_value (float): V(Z*) from the flow.
        mu (Optional[Measure]): Source marginal, needed for the MBB cost.
        nu (Optional[Measure]): Target marginal, needed for the MBB cost.

    Returns:
        DualityGap: Estimate, absolute gap and standard error.
    """
    products = paths.M[:, -1] * paths.B[:, -1] - paths.M[:, 0] * paths.B[:, 0]
    p_hat = float(products.mean())
    se = float(products.std(ddof=1) / np.sqrt(len(products)))
    mt_hat = mt_value(p_hat, mu, nu) if mu is not None and nu is not None else None

    gap = DualityGap(p_hat=p_hat, gap=abs(p_hat - v_value), se=se, mt_hat=mt_hat)
    log.info(f"Duality: P={p_hat:.6f} +/- {se:.2e}, V={v_value:.6f}, gap={gap.gap:.3e}.")
    return gap
