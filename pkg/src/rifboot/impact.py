"""Journal impact scores.

Implements the simple impact factor (citations per article), three
recursive variants that weight citations by the standing of the citing
journal, and the random-surfer eigenfactor pair.  All recursive scores are
dominant eigenvectors of nonnegative matrices and are computed by power
iteration; the iteration matrix is never formed densely, only its action
on a vector.

The variants differ in how a citation is discounted:

* invariant: citations are scaled by the citing journal's citations given
  per article (its reference intensity), so journals that cite profusely
  count for less per citation.  Rescaling any journal's total citing
  activity leaves the scores unchanged.
* liebowitz_palmer: citations weighted by the citing journal's score with
  no reference-intensity discount.  Not invariant to citing activity.
* koczy: citations scaled by total citations given only, with no
  per-article adjustment on either side.  Invariant to splitting a
  journal's output into more, thinner articles.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .dataset import CrossCitationSystem
from .errors import ConvergenceError, SingularSystemError


class Method(str, Enum):
    SIMPLE = "simple"
    INVARIANT = "invariant"
    LIEBOWITZ_PALMER = "liebowitz_palmer"
    KOCZY = "koczy"
    EIGENFACTOR = "eigenfactor"
    ARTICLE_INFLUENCE = "article_influence"


class Normalization(str, Enum):
    UNIT_EUCLIDEAN = "unit_euclidean"
    TOP100 = "top100"
    SUM_ONE = "sum_one"
    RAW = "raw"


@dataclass(frozen=True)
class ImpactVector:
    """Scores for every journal in dataset order, tagged with the method
    that produced them and the normalization they carry."""

    method: Method
    scores: np.ndarray
    norm: Normalization

    def __post_init__(self) -> None:
        scores = np.asarray(self.scores, dtype=np.float64).copy()
        scores.flags.writeable = False
        object.__setattr__(self, "scores", scores)
        if scores.ndim != 1 or scores.size == 0:
            raise ValueError("scores must be a nonempty 1-d array")
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores must be finite")
        if scores.min() < 0:
            raise ValueError("scores must be nonnegative")
        if not scores.any():
            raise ValueError("scores must not be identically zero")
        if self.norm is Normalization.UNIT_EUCLIDEAN:
            if abs(np.linalg.norm(scores) - 1.0) > 1e-12:
                raise ValueError("unit_euclidean scores must have Euclidean norm 1")
        elif self.norm is Normalization.SUM_ONE:
            if abs(scores.sum() - 1.0) > 1e-12:
                raise ValueError("sum_one scores must sum to 1")

    def __len__(self) -> int:
        return self.scores.size


@dataclass(frozen=True)
class PowerIterationConfig:
    """Stopping rule for power iteration.

    With ``residual_tolerance > 0`` the iteration stops once successive
    iterates differ by at most the tolerance in the infinity norm, and
    raises if that does not happen within ``max_iterations``.  With
    ``residual_tolerance == 0`` it runs exactly ``max_iterations`` steps,
    which is useful for reproducing fixed-step runs.
    """

    max_iterations: int = 200
    residual_tolerance: float = 1e-12

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.residual_tolerance < 0:
            raise ValueError("residual_tolerance must be >= 0")

    @classmethod
    def fixed(cls, iterations: int) -> "PowerIterationConfig":
        """Run exactly ``iterations`` steps with no convergence check."""
        return cls(max_iterations=iterations, residual_tolerance=0.0)


@dataclass(frozen=True)
class EigenfactorConfig:
    """Damping for the random-surfer model: with probability ``rho`` the
    surfer follows a citation, otherwise teleports in proportion to
    article counts."""

    rho: float = 0.85

    def __post_init__(self) -> None:
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie strictly in (0, 1), got {self.rho}")


def _checked_init(init: np.ndarray, n_journals: int) -> np.ndarray:
    v = np.asarray(init, dtype=np.float64)
    if v.shape != (n_journals,):
        raise ValueError(f"init must have length {n_journals}, got shape {v.shape}")
    return v


def _power_iteration(
    matvec: Callable[[np.ndarray], np.ndarray],
    init: np.ndarray,
    cfg: PowerIterationConfig,
) -> np.ndarray:
    """Iterate v <- M v / ||M v|| from a nonnegative start vector.

    Returns the final unit vector with its largest-magnitude entry made
    positive.  Raises ConvergenceError if a positive residual tolerance is
    not met within the iteration budget, and SingularSystemError if an
    iterate collapses to zero.
    """
    v = np.asarray(init, dtype=np.float64)
    scale = np.linalg.norm(v)
    if scale == 0.0:
        raise ValueError("initial vector must be nonzero")
    v = v / scale
    for _ in range(cfg.max_iterations):
        w = matvec(v)
        scale = np.linalg.norm(w)
        if scale == 0.0:
            raise SingularSystemError("power iteration collapsed to the zero vector")
        w /= scale
        residual = np.max(np.abs(w - v))
        v = w
        if cfg.residual_tolerance > 0.0 and residual <= cfg.residual_tolerance:
            break
    else:
        if cfg.residual_tolerance > 0.0:
            raise ConvergenceError(
                f"power iteration did not reach residual {cfg.residual_tolerance:g} "
                f"within {cfg.max_iterations} iterations (last residual {residual:g})"
            )
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v


def simple_if(system: CrossCitationSystem) -> ImpactVector:
    """Citations received per article, with no weighting of sources."""
    received = system.cross_citations.sum(axis=1)
    scores = received / system.article_counts
    return ImpactVector(Method.SIMPLE, scores, Normalization.RAW)


def invariant_scores(
    cross_citations: np.ndarray,
    citations_given: np.ndarray,
    article_counts: np.ndarray,
    init: np.ndarray,
    cfg: PowerIterationConfig,
) -> np.ndarray:
    """Power-iterate the invariant operator given raw system arrays.

    The operator's action on v is computed as a chain of elementwise
    scalings around one matrix-vector product: scale by article counts,
    divide by citations given, multiply by the cross-citation matrix,
    divide by article counts.  Returns a unit Euclidean vector.
    """
    if np.any(citations_given == 0):
        raise SingularSystemError("citations_given contains zeros")
    c = np.asarray(cross_citations, dtype=np.float64)
    d = np.asarray(citations_given, dtype=np.float64)
    a = np.asarray(article_counts, dtype=np.float64)
    init = _checked_init(init, a.size)

    def matvec(v: np.ndarray) -> np.ndarray:
        return (c @ (a * v / d)) / a

    return _power_iteration(matvec, init, cfg)


def invariant_rif(
    system: CrossCitationSystem,
    init: ImpactVector,
    cfg: PowerIterationConfig | None = None,
) -> ImpactVector:
    """Recursive impact factor with reference-intensity discounting.

    Each citation from journal i is worth the citing journal's score
    divided by its citations given per article.  The result is the
    dominant eigenvector of a nonnegative matrix similar to a column
    substochastic one, so it is unique up to scale for connected systems;
    it is returned with unit Euclidean norm.

    Parameters
    ----------
    system : CrossCitationSystem
    init : ImpactVector
        Starting point, e.g. the simple impact factor for a cold start or
        a previously converged score vector for a warm one.  Only the
        direction matters.
    cfg : PowerIterationConfig, optional
        Defaults to the residual-tolerance rule.
    """
    cfg = cfg or PowerIterationConfig()
    scores = invariant_scores(
        system.cross_citations,
        system.citations_given,
        system.article_counts,
        init.scores,
        cfg,
    )
    return ImpactVector(Method.INVARIANT, scores, Normalization.UNIT_EUCLIDEAN)


def liebowitz_palmer(
    system: CrossCitationSystem,
    init: ImpactVector,
    cfg: PowerIterationConfig | None = None,
) -> ImpactVector:
    """Recursive score without the reference-intensity discount.

    Citations are weighted by the citing journal's score alone, so the
    result depends on how freely each journal cites: doubling a journal's
    reference list doubles its influence on everyone it cites.
    """
    cfg = cfg or PowerIterationConfig()
    c = system.cross_citations.astype(np.float64)
    a = system.article_counts.astype(np.float64)

    def matvec(v: np.ndarray) -> np.ndarray:
        return (c @ v) / a

    scores = _power_iteration(matvec, _checked_init(init.scores, a.size), cfg)
    return ImpactVector(Method.LIEBOWITZ_PALMER, scores, Normalization.UNIT_EUCLIDEAN)


def koczy_modified(
    system: CrossCitationSystem,
    init: ImpactVector,
    cfg: PowerIterationConfig | None = None,
) -> ImpactVector:
    """Recursive score normalized by citations given on both sides.

    Article counts drop out entirely, so splitting every article of a
    journal in two (halving per-article citations, doubling the count)
    leaves these scores unchanged.
    """
    cfg = cfg or PowerIterationConfig()
    c = system.cross_citations.astype(np.float64)
    d = system.citations_given.astype(np.float64)

    def matvec(v: np.ndarray) -> np.ndarray:
        return (c @ v) / d

    scores = _power_iteration(matvec, _checked_init(init.scores, d.size), cfg)
    return ImpactVector(Method.KOCZY, scores, Normalization.UNIT_EUCLIDEAN)


def eigenfactor(
    system: CrossCitationSystem,
    cfg: EigenfactorConfig | None = None,
    iter_cfg: PowerIterationConfig | None = None,
) -> tuple[ImpactVector, ImpactVector]:
    """Random-surfer scores: eigenfactor and article influence.

    Self-citations are removed, each remaining column is normalized to
    sum 1 (journals citing nobody else redistribute by article share),
    and the surfer teleports with probability ``1 - rho`` in proportion
    to article counts.  The eigenfactor is the citation-following part of
    the stationary flow, normalized to sum 1; article influence divides
    it by the journal's article count.

    Returns
    -------
    (ImpactVector, ImpactVector)
        Eigenfactor scores (sum-one normalization) and article influence
        scores (raw).

    Raises
    ------
    SingularSystemError
        If the system has no cross-journal citations at all.
    """
    cfg = cfg or EigenfactorConfig()
    iter_cfg = iter_cfg or PowerIterationConfig()
    h = system.cross_citations.astype(np.float64)
    np.fill_diagonal(h, 0.0)
    if not h.any():
        raise SingularSystemError("no cross-journal citations; surfer model undefined")
    shares = system.article_counts / system.article_counts.sum()
    colsums = h.sum(axis=0)
    dangling = colsums == 0
    h[:, ~dangling] /= colsums[~dangling]
    h[:, dangling] = shares[:, None]

    def matvec(p: np.ndarray) -> np.ndarray:
        return cfg.rho * (h @ p) + (1.0 - cfg.rho) * shares * p.sum()

    stationary = _power_iteration(matvec, shares, iter_cfg)
    flow = h @ stationary
    ef = flow / flow.sum()
    ai = ef / system.article_counts
    return (
        ImpactVector(Method.EIGENFACTOR, ef, Normalization.SUM_ONE),
        ImpactVector(Method.ARTICLE_INFLUENCE, ai, Normalization.RAW),
    )


def rescale(vector: ImpactVector, norm: Normalization) -> ImpactVector:
    """Return the same scores under a different normalization.

    Normalizations differ only by a positive scalar, so rescaling is
    exact and invertible: unit Euclidean norm, sum equal to 1, maximum
    equal to 100, or raw (returned unchanged).
    """
    scores = vector.scores
    if norm is Normalization.UNIT_EUCLIDEAN:
        scores = scores / np.linalg.norm(scores)
    elif norm is Normalization.SUM_ONE:
        scores = scores / scores.sum()
    elif norm is Normalization.TOP100:
        scores = scores * (100.0 / scores.max())
    else:
        scores = scores.copy()
    return ImpactVector(vector.method, scores, norm)
