"""Cluster bootstrap over articles and score-level uncertainty summaries.

Resampling happens at the article level: each journal's cited-article rows
are redrawn with replacement from its own articles, the journal-level
system is rebuilt, and the recursive score is re-solved warm-started at
the empirical solution.  Journals are treated as clusters because citation
counts of articles in the same journal are not independent.

Every bootstrap iteration draws from its own random stream derived from
``(master_seed, iteration)``, so results are bit-identical no matter how
many workers run the loop or in what order iterations complete.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .dataset import CitationDataset, CrossCitationSystem
from .errors import DataValidationError, ResampleBudgetError
from .impact import (
    ImpactVector,
    Method,
    Normalization,
    PowerIterationConfig,
    invariant_scores,
)

_FORMAT_TAG = "rifboot-ensemble-v1"


class ResamplingMode(str, Enum):
    CLUSTER_WITHIN_JOURNAL = "cluster"
    POOLED_ACROSS_JOURNALS = "pooled"


@dataclass(frozen=True)
class BootstrapConfig:
    replications: int = 1000
    master_seed: int = 0
    mode: ResamplingMode = ResamplingMode.CLUSTER_WITHIN_JOURNAL
    max_redraws_per_iteration: int = 100

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")
        if self.max_redraws_per_iteration < 0:
            raise ValueError("max_redraws_per_iteration must be >= 0")


@dataclass(frozen=True)
class Resample:
    """One redrawn article sample.

    ``drawn[s]`` is the original article index occupying slot ``s``; slot
    ``s`` belongs to the journal of the article it replaces, so under
    within-journal resampling the slot layout matches the dataset's.
    ``multiplicity[k]`` counts how often original article ``k`` was drawn.
    """

    mode: ResamplingMode
    drawn: np.ndarray
    multiplicity: np.ndarray

    def counts_matrix(self, ds: CitationDataset) -> sp.csr_matrix:
        """Resampled article-by-citing-journal counts (one row per slot)."""
        return ds.counts[self.drawn]

    def slot_journal(self, ds: CitationDataset) -> np.ndarray:
        """Journal owning each slot; articles keep their publisher."""
        return ds.article_journal[self.drawn]


def cluster_resample(ds: CitationDataset, rng: np.random.Generator) -> Resample:
    """Draw, for every journal, its own article count of articles uniformly
    with replacement from that journal's articles."""
    counts = ds.article_counts
    base = np.repeat(ds.journal_offsets[:-1], counts)
    sizes = np.repeat(counts, counts)
    u = rng.random(ds.n_articles)
    drawn = base + (u * sizes).astype(np.int64)
    return Resample(
        mode=ResamplingMode.CLUSTER_WITHIN_JOURNAL,
        drawn=drawn,
        multiplicity=np.bincount(drawn, minlength=ds.n_articles),
    )


def pooled_resample(ds: CitationDataset, rng: np.random.Generator) -> Resample:
    """Draw the full article count uniformly with replacement from all
    articles, ignoring journal boundaries.  Articles keep their publishing
    journal, so per-journal article counts vary across draws."""
    drawn = rng.integers(0, ds.n_articles, size=ds.n_articles, dtype=np.int64)
    return Resample(
        mode=ResamplingMode.POOLED_ACROSS_JOURNALS,
        drawn=drawn,
        multiplicity=np.bincount(drawn, minlength=ds.n_articles),
    )


def _raw_resampled_system(
    ds: CitationDataset, resample: Resample
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Journal-level arrays for a resample, skipping validity checks.

    Aggregates drawn article rows by weighting each original row with its
    multiplicity, which avoids materializing the per-slot assignment.
    Returns (cross_citations, citations_given, article_counts); the latter
    two may contain zeros for unlucky draws.
    """
    weights = resample.multiplicity
    weighted_sum = sp.csr_matrix(
        (weights, np.arange(ds.n_articles, dtype=np.int64), ds.journal_offsets),
        shape=(ds.n_journals, ds.n_articles),
    )
    cross = (weighted_sum @ ds.counts).toarray().astype(np.int64)
    given = cross.sum(axis=0)
    if resample.mode is ResamplingMode.CLUSTER_WITHIN_JOURNAL:
        articles = ds.article_counts
    else:
        articles = np.add.reduceat(weights, ds.journal_offsets[:-1])
    return cross, given, articles


def resampled_system(ds: CitationDataset, resample: Resample) -> CrossCitationSystem:
    """Journal-level system for a resample.

    Raises SingularSystemError (via the system's own validation) when the
    draw left some journal without citations given, or DataValidationError
    when a pooled draw emptied a journal entirely.
    """
    cross, given, articles = _raw_resampled_system(ds, resample)
    return CrossCitationSystem(
        cross_citations=cross, citations_given=given, article_counts=articles
    )


@dataclass(frozen=True)
class BootstrapEnsemble:
    """Bootstrap draws of the recursive score vector.

    Attributes
    ----------
    samples : ndarray, shape (replications, n_journals)
        One unit-Euclidean score vector per row, in dataset journal order.
    config : BootstrapConfig
    empirical : ImpactVector
        The full-sample solution the draws were warm-started from.
    redraw_count : int
        Total number of degenerate draws that were redrawn.
    """

    samples: np.ndarray
    config: BootstrapConfig
    empirical: ImpactVector
    redraw_count: int = 0

    def __post_init__(self) -> None:
        if self.samples.ndim != 2:
            raise ValueError("samples must be 2-d (replications by journals)")
        if self.samples.shape[0] != self.config.replications:
            raise ValueError("sample rows do not match configured replications")
        if self.samples.shape[1] != len(self.empirical):
            raise ValueError("sample columns do not match empirical score length")
        norms = np.linalg.norm(self.samples, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("every sample row must have unit Euclidean norm")

    @property
    def n_journals(self) -> int:
        return self.samples.shape[1]


def _iteration_rng(master_seed: int, iteration: int, attempt: int) -> np.random.Generator:
    # spawn_key makes streams independent per (iteration, attempt) without
    # any sequential state, so worker scheduling cannot change the draw
    seq = np.random.SeedSequence(master_seed, spawn_key=(iteration, attempt))
    return np.random.default_rng(seq)


def run_bootstrap(
    ds: CitationDataset,
    system: CrossCitationSystem,
    empirical: ImpactVector,
    cfg: BootstrapConfig,
    iter_cfg: PowerIterationConfig | None = None,
    workers: int = 1,
) -> BootstrapEnsemble:
    """Resample articles, rebuild the system, and re-solve per iteration.

    Draws that leave a journal with zero citations given (or, in pooled
    mode, zero articles) cannot be solved and are redrawn from a fresh
    stream keyed by the attempt number, up to the configured budget.

    Parameters
    ----------
    ds : CitationDataset
        Article-level data; must be the dataset ``system`` was built from.
    system : CrossCitationSystem
        Used only for shape validation against ``ds``.
    empirical : ImpactVector
        Warm start for every iteration's power iteration.
    cfg : BootstrapConfig
    iter_cfg : PowerIterationConfig, optional
        Solver settings per iteration; defaults to the residual rule.
    workers : int
        Thread count for the iteration loop.  Any value produces identical
        output; it only affects wall-clock time.

    Raises
    ------
    ResampleBudgetError
        If some iteration exhausts its redraw budget.
    """
    if system.n_journals != ds.n_journals:
        raise DataValidationError("system and dataset disagree on journal count")
    if len(empirical) != ds.n_journals:
        raise DataValidationError("empirical scores do not match journal count")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    solver_cfg = iter_cfg or PowerIterationConfig()
    resampler = (
        cluster_resample
        if cfg.mode is ResamplingMode.CLUSTER_WITHIN_JOURNAL
        else pooled_resample
    )

    def solve_iteration(b: int) -> tuple[np.ndarray, int]:
        for attempt in range(cfg.max_redraws_per_iteration + 1):
            rng = _iteration_rng(cfg.master_seed, b, attempt)
            rs = resampler(ds, rng)
            cross, given, articles = _raw_resampled_system(ds, rs)
            if np.any(given == 0) or np.any(articles == 0):
                continue
            scores = invariant_scores(
                cross, given, articles, empirical.scores, solver_cfg
            )
            return scores, attempt
        raise ResampleBudgetError(
            f"iteration {b}: no usable resample within "
            f"{cfg.max_redraws_per_iteration + 1} attempts"
        )

    indices = range(cfg.replications)
    if workers == 1:
        results = [solve_iteration(b) for b in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(solve_iteration, indices))

    samples = np.vstack([scores for scores, _ in results])
    redraws = int(sum(attempt for _, attempt in results))
    return BootstrapEnsemble(
        samples=samples, config=cfg, empirical=empirical, redraw_count=redraws
    )


@dataclass(frozen=True)
class ScoreSummary:
    """Per-journal location and spread of the bootstrap score draws."""

    mean: np.ndarray
    standard_error: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    alpha: float


def summarize_scores(ens: BootstrapEnsemble, alpha: float = 0.05) -> ScoreSummary:
    """Mean, standard error, and equal-tailed percentile interval.

    The standard error is the draw standard deviation with one delta
    degree of freedom; interval endpoints are linearly interpolated
    percentiles at ``alpha/2`` and ``1 - alpha/2``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if ens.samples.shape[0] < 2:
        raise ValueError("need at least 2 replications to summarize spread")
    return ScoreSummary(
        mean=ens.samples.mean(axis=0),
        standard_error=ens.samples.std(axis=0, ddof=1),
        ci_lower=np.quantile(ens.samples, alpha / 2, axis=0),
        ci_upper=np.quantile(ens.samples, 1.0 - alpha / 2, axis=0),
        alpha=alpha,
    )


def save_ensemble(
    ens: BootstrapEnsemble, issns: tuple[str, ...], path: str | Path
) -> None:
    """Write the ensemble as CSV: comment metadata, an ISSN header row,
    then one row per replication.

    Floats are serialized with shortest round-trip precision, so a load
    followed by a save reproduces the file byte for byte.
    """
    if len(issns) != ens.n_journals:
        raise ValueError("issns length does not match ensemble columns")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# format={_FORMAT_TAG}\n")
        fh.write(f"# replications={ens.config.replications}\n")
        fh.write(f"# master_seed={ens.config.master_seed}\n")
        fh.write(f"# mode={ens.config.mode.value}\n")
        fh.write(f"# max_redraws_per_iteration={ens.config.max_redraws_per_iteration}\n")
        fh.write(f"# redraw_count={ens.redraw_count}\n")
        fh.write("# empirical=" + ",".join(repr(float(x)) for x in ens.empirical.scores) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(issns)
        for row in ens.samples:
            writer.writerow([repr(float(x)) for x in row])


def load_ensemble(path: str | Path) -> tuple[BootstrapEnsemble, tuple[str, ...]]:
    """Read an ensemble written by :func:`save_ensemble`.

    Returns the ensemble and the ISSN header naming its columns.
    """
    meta: dict[str, str] = {}
    body: list[str] = []
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = value
            else:
                body.append(line)
    if meta.get("format") != _FORMAT_TAG:
        raise DataValidationError(f"{path}: not a {_FORMAT_TAG} file")
    reader = csv.reader(body)
    try:
        issns = tuple(next(reader))
    except StopIteration:
        raise DataValidationError(f"{path}: missing ISSN header row")
    samples = np.array([[float(x) for x in row] for row in reader if row])
    if samples.ndim != 2 or samples.shape[1] != len(issns):
        raise DataValidationError(f"{path}: sample rows do not match header width")
    try:
        config = BootstrapConfig(
            replications=int(meta["replications"]),
            master_seed=int(meta["master_seed"]),
            mode=ResamplingMode(meta["mode"]),
            max_redraws_per_iteration=int(meta["max_redraws_per_iteration"]),
        )
        redraws = int(meta["redraw_count"])
        empirical_scores = np.array([float(x) for x in meta["empirical"].split(",")])
    except (KeyError, ValueError) as exc:
        raise DataValidationError(f"{path}: bad or missing metadata ({exc})")
    if samples.shape[0] != config.replications:
        raise DataValidationError(
            f"{path}: {samples.shape[0]} rows but metadata declares "
            f"{config.replications} replications"
        )
    empirical = ImpactVector(
        Method.INVARIANT, empirical_scores, Normalization.UNIT_EUCLIDEAN
    )
    ensemble = BootstrapEnsemble(
        samples=samples, config=config, empirical=empirical, redraw_count=redraws
    )
    return ensemble, issns
