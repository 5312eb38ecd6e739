"""Confidence sets for journal ranks.

Given a bootstrap ensemble of score vectors, three families of rank
uncertainty statements are available:

* Goldstein: rank every journal within each draw (midranks for ties) and
  take percentiles of the per-draw ranks.
* Xie: replace the rank indicator with a normal kernel so that nearly
  tied journals share rank mass, then widen the percentile interval by
  half the estimated number of ties on each side.
* Mogstad: simultaneous pairwise comparisons; a journal's rank set is
  bounded by how many rivals are provably better and provably worse at
  the requested confidence level.

Rank 1 is best (highest score).  All percentile computations use linear
interpolation between order statistics.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np
from scipy.special import ndtr
from scipy.stats import rankdata

from .bootstrap import BootstrapEnsemble
from .impact import ImpactVector

_SQRT_TWO_PI = float(np.sqrt(2.0 * np.pi))


class RankMethod(str, Enum):
    GOLDSTEIN = "goldstein"
    XIE = "xie"
    XIE_SIGMA_DIFF = "xie_sigmadiff"
    MOGSTAD = "mogstad"
    MOGSTAD_COV = "mogstad_cov"


class SigmaMode(str, Enum):
    INDEPENDENT_SUM = "independent"
    COVARIANCE_ADJUSTED = "covariance"


class BandwidthMode(str, Enum):
    XIE_IQR = "iqr"
    SIGMA_DIFF = "sigma_diff"


def _scores_of(v: ImpactVector | np.ndarray) -> np.ndarray:
    scores = v.scores if isinstance(v, ImpactVector) else v
    return np.asarray(scores, dtype=np.float64)


def _eps_floor(scores: np.ndarray) -> float:
    """Tiny positive floor for bandwidths and sigma divisors, scaled to the
    spread of the scores so it is negligible yet avoids division blowups."""
    q75, q25 = np.percentile(scores, [75.0, 25.0])
    for scale in (q75 - q25, np.ptp(scores), np.max(np.abs(scores))):
        if scale > 0.0:
            return 1e-12 * float(scale)
    return 1e-12


@dataclass(frozen=True)
class RankEstimate:
    """Midranks (possibly fractional under ties) in journal order."""

    ranks: np.ndarray

    def __post_init__(self) -> None:
        ranks = np.asarray(self.ranks, dtype=np.float64)
        object.__setattr__(self, "ranks", ranks)
        j = ranks.size
        if ranks.ndim != 1 or j == 0:
            raise ValueError("ranks must be a nonempty 1-d array")
        if ranks.min() < 1.0 - 1e-9 or ranks.max() > j + 1e-9:
            raise ValueError("ranks must lie in [1, n_journals]")


@dataclass(frozen=True)
class PairwiseSigma:
    """Standard deviations of pairwise score differences, one per ordered
    pair, with zeros on the diagonal."""

    sigma: np.ndarray
    mode: SigmaMode

    def __post_init__(self) -> None:
        s = np.asarray(self.sigma, dtype=np.float64)
        object.__setattr__(self, "sigma", s)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError("sigma must be square")
        if s.min() < 0:
            raise ValueError("sigma must be nonnegative")
        if np.any(np.diag(s) != 0):
            raise ValueError("sigma diagonal must be zero")
        if not np.allclose(s, s.T, rtol=1e-12, atol=0.0):
            raise ValueError("sigma must be symmetric")


@dataclass(frozen=True)
class BandwidthMatrix:
    """Kernel bandwidths per journal pair, strictly positive off the
    diagonal, plus the scale parameters that produced them."""

    tau: np.ndarray
    mode: BandwidthMode
    gamma: float
    beta: float

    def __post_init__(self) -> None:
        t = np.asarray(self.tau, dtype=np.float64)
        object.__setattr__(self, "tau", t)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValueError("tau must be square")
        offdiag = ~np.eye(t.shape[0], dtype=bool)
        if t.shape[0] > 1 and t[offdiag].min() <= 0:
            raise ValueError("off-diagonal bandwidths must be strictly positive")
        if not np.allclose(t, t.T, rtol=1e-12, atol=0.0):
            raise ValueError("tau must be symmetric")


@dataclass(frozen=True)
class RankConfidenceSet:
    """Integer rank interval per journal at confidence level 1 - alpha."""

    method: RankMethod
    lower: np.ndarray
    upper: np.ndarray
    alpha: float

    def __post_init__(self) -> None:
        lower = np.asarray(self.lower, dtype=np.int64)
        upper = np.asarray(self.upper, dtype=np.int64)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        j = lower.size
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be 1-d arrays of equal length")
        if np.any(lower < 1) or np.any(upper > j):
            raise ValueError("rank bounds must lie within [1, n_journals]")
        if np.any(lower > upper):
            raise ValueError("lower bounds must not exceed upper bounds")

    def widths(self) -> np.ndarray:
        return (self.upper - self.lower).astype(np.float64)


def empirical_ranks(v: ImpactVector | np.ndarray) -> RankEstimate:
    """Midrank of every journal: one plus the number of strictly better
    rivals, plus half the number of exact ties."""
    scores = _scores_of(v)
    greater = scores[None, :] > scores[:, None]
    equal = scores[None, :] == scores[:, None]
    ranks = 1.0 + greater.sum(axis=1) + 0.5 * (equal.sum(axis=1) - 1)
    return RankEstimate(ranks)


def ranks_per_draw(samples: np.ndarray) -> np.ndarray:
    """Midranks within each draw (row) of a sample matrix."""
    return rankdata(-samples, method="average", axis=1)


def _interval_from_quantiles(
    lower_q: np.ndarray, upper_q: np.ndarray, n_journals: int
) -> tuple[np.ndarray, np.ndarray]:
    # round outward, then clip into the feasible rank range
    lower = np.clip(np.floor(lower_q), 1, n_journals).astype(np.int64)
    upper = np.clip(np.ceil(upper_q), 1, n_journals).astype(np.int64)
    return lower, upper


def goldstein_rank_ci(ens: BootstrapEnsemble, alpha: float = 0.05) -> RankConfidenceSet:
    """Percentile interval of per-draw ranks.

    Each bootstrap draw is ranked on its own; the interval runs from the
    floored ``alpha/2`` percentile to the ceiled ``1 - alpha/2`` percentile
    of those ranks.
    """
    draw_ranks = ranks_per_draw(ens.samples)
    lower_q = np.quantile(draw_ranks, alpha / 2, axis=0)
    upper_q = np.quantile(draw_ranks, 1.0 - alpha / 2, axis=0)
    lower, upper = _interval_from_quantiles(lower_q, upper_q, ens.n_journals)
    return RankConfidenceSet(RankMethod.GOLDSTEIN, lower, upper, alpha)


def pairwise_sigma(
    ens: BootstrapEnsemble, mode: SigmaMode = SigmaMode.INDEPENDENT_SUM
) -> PairwiseSigma:
    """Dispersion of score differences for every journal pair.

    INDEPENDENT_SUM combines the two marginal bootstrap standard errors
    as if the scores were independent.  COVARIANCE_ADJUSTED subtracts
    twice the covariance, which equals the standard deviation of the
    per-draw differences; tiny negative radicands from rounding are
    clamped to zero.
    """
    samples = ens.samples
    if mode is SigmaMode.INDEPENDENT_SUM:
        var = samples.var(axis=0, ddof=1)
        sig = np.sqrt(var[:, None] + var[None, :])
    else:
        cov = np.cov(samples, rowvar=False, ddof=1)
        var = np.diag(cov)
        sig = np.sqrt(np.clip(var[:, None] - 2.0 * cov + var[None, :], 0.0, None))
    np.fill_diagonal(sig, 0.0)
    return PairwiseSigma(sigma=sig, mode=mode)


def xie_bandwidth(
    empirical: ImpactVector | np.ndarray,
    sigma: PairwiseSigma,
    mode: BandwidthMode = BandwidthMode.XIE_IQR,
    beta: float = 0.5,
) -> BandwidthMatrix:
    """Kernel bandwidths for smoothed ranking.

    XIE_IQR sets the pair bandwidth to ``gamma * sigma ** beta`` where
    ``gamma`` is the interquartile range of the empirical scores (the
    scale of the data being ranked).  SIGMA_DIFF uses the pairwise sigma
    itself.  Either way bandwidths are floored at a tiny positive value
    so later divisions stay finite.
    """
    scores = _scores_of(empirical)
    q75, q25 = np.percentile(scores, [75.0, 25.0])
    gamma = float(q75 - q25)
    eps = _eps_floor(scores)
    if mode is BandwidthMode.XIE_IQR:
        tau = gamma * sigma.sigma**beta
    else:
        tau = sigma.sigma.copy()
    tau = np.maximum(tau, eps)
    return BandwidthMatrix(tau=tau, mode=mode, gamma=gamma, beta=beta)


def xie_smoothed_rank(
    v: ImpactVector | np.ndarray, tau: BandwidthMatrix
) -> RankEstimate:
    """Smoothed rank: rivals contribute by the normal probability of
    scoring higher at the pair's bandwidth instead of by indicator.

    An exact tie contributes exactly one half; with all bandwidths at the
    floor the indicator midranks are recovered.
    """
    scores = _scores_of(v)
    z = (scores[None, :] - scores[:, None]) / tau.tau
    # the diagonal has z = 0, so its kernel mass is exactly 0.5; drop it
    ranks = 1.0 + ndtr(z).sum(axis=1) - 0.5
    return RankEstimate(ranks)


def smoothed_ranks_per_draw(samples: np.ndarray, tau: BandwidthMatrix) -> np.ndarray:
    """Smoothed ranks of every draw under one fixed bandwidth matrix,
    computed in chunks to bound peak memory."""
    b, j = samples.shape
    out = np.empty((b, j))
    chunk = max(1, (1 << 22) // max(1, j * j))
    for start in range(0, b, chunk):
        block = samples[start : start + chunk]
        z = (block[:, None, :] - block[:, :, None]) / tau.tau[None, :, :]
        out[start : start + chunk] = 1.0 + ndtr(z).sum(axis=2) - 0.5
    return out


def xie_correction(v: ImpactVector | np.ndarray, tau: BandwidthMatrix) -> np.ndarray:
    """Estimated tie count per journal: normal density mass at each pair's
    standardized score gap, with every pair capped at one full tie."""
    scores = _scores_of(v)
    z = (scores[None, :] - scores[:, None]) / tau.tau
    density = np.exp(-0.5 * z * z) / _SQRT_TWO_PI
    contribution = np.minimum(density, 1.0)
    np.fill_diagonal(contribution, 0.0)
    return contribution.sum(axis=1)


def xie_rank_ci(
    ens: BootstrapEnsemble, tau: BandwidthMatrix, alpha: float = 0.05
) -> RankConfidenceSet:
    """Percentile interval of smoothed ranks, widened by half the
    estimated tie count on each side.

    The bandwidths stay fixed at their empirical values across draws;
    only the scores vary.  Endpoints are rounded outward and clipped to
    the feasible rank range.
    """
    smoothed = smoothed_ranks_per_draw(ens.samples, tau)
    lower_q = np.quantile(smoothed, alpha / 2, axis=0)
    upper_q = np.quantile(smoothed, 1.0 - alpha / 2, axis=0)
    ties = xie_correction(ens.empirical, tau)
    lower, upper = _interval_from_quantiles(
        lower_q - 0.5 * ties, upper_q + 0.5 * ties, ens.n_journals
    )
    method = (
        RankMethod.XIE if tau.mode is BandwidthMode.XIE_IQR else RankMethod.XIE_SIGMA_DIFF
    )
    return RankConfidenceSet(method, lower, upper, alpha)


def _critical_values(
    samples: np.ndarray,
    sigma_floored: np.ndarray,
    journals: Iterable[int],
    alpha: float,
) -> np.ndarray:
    means = samples.mean(axis=0)
    out = []
    for j in journals:
        centered = (samples[:, j : j + 1] - samples) - (means[j] - means)
        z = np.abs(centered) / sigma_floored[j]
        z[:, j] = -1.0  # exclude the self-pair from the max
        out.append(np.quantile(z.max(axis=1), 1.0 - alpha))
    return np.asarray(out)


def mogstad_critical_value(
    ens: BootstrapEnsemble,
    sigma: PairwiseSigma,
    j: int,
    alpha: float = 0.05,
) -> float:
    """Critical value for journal ``j``: the ``1 - alpha`` quantile over
    draws of the largest studentized deviation of its pairwise score
    differences from their bootstrap means."""
    sig = np.maximum(sigma.sigma, _eps_floor(ens.empirical.scores))
    return float(_critical_values(ens.samples, sig, [j], alpha)[0])


def mogstad_critical_values(
    ens: BootstrapEnsemble, sigma: PairwiseSigma, alpha: float = 0.05
) -> np.ndarray:
    """Critical values for every journal; see mogstad_critical_value."""
    sig = np.maximum(sigma.sigma, _eps_floor(ens.empirical.scores))
    return _critical_values(ens.samples, sig, range(ens.n_journals), alpha)


def mogstad_rank_set(
    empirical: ImpactVector | np.ndarray,
    sigma: PairwiseSigma,
    critical_values: np.ndarray,
    alpha: float = 0.05,
) -> RankConfidenceSet:
    """Rank set from simultaneous pairwise confidence intervals.

    For each pair, the interval for the score difference is the empirical
    difference plus or minus the pair sigma scaled by the journal's
    critical value.  Rivals whose interval lies entirely above zero are
    provably better and push the lower rank bound down the table; rivals
    entirely below zero are provably worse and pull the upper bound up.
    With every pair separated, the set collapses to the empirical rank.
    """
    scores = _scores_of(empirical)
    j = scores.size
    s = np.asarray(critical_values, dtype=np.float64)
    if s.shape != (j,):
        raise ValueError("critical_values must have one entry per journal")
    diffs = scores[:, None] - scores[None, :]
    radius = sigma.sigma * s[:, None]
    offdiag = ~np.eye(j, dtype=bool)
    provably_better = ((diffs + radius < 0) & offdiag).sum(axis=1)
    provably_worse = ((diffs - radius > 0) & offdiag).sum(axis=1)
    method = (
        RankMethod.MOGSTAD
        if sigma.mode is SigmaMode.INDEPENDENT_SUM
        else RankMethod.MOGSTAD_COV
    )
    return RankConfidenceSet(
        method=method,
        lower=provably_better + 1,
        upper=j - provably_worse,
        alpha=alpha,
    )


def ci_width_summary(sets: Iterable[RankConfidenceSet]) -> dict[RankMethod, float]:
    """Average interval width (upper minus lower) per method."""
    return {s.method: float(s.widths().mean()) for s in sets}
