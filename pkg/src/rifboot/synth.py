"""Synthetic citation datasets with a planted quality ranking.

Citation counts are overdispersed relative to Poisson: each article gets
a gamma-distributed multiplier on its expected citation rate, so article
totals are negative-binomial-like and right-skewed, as real citation
counts are.  Expected per-article citations scale with the publishing
journal's quality and the citing journal's activity, and inversely with
the publishing journal's article count.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .dataset import CitationDataset, Journal
from .rank_inference import empirical_ranks


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings.

    Attributes
    ----------
    n_journals : int
        At least 2.
    articles_per_journal : (int, int)
        Inclusive range; each journal's article count is drawn uniformly.
    quality : ndarray or None
        Positive per-journal quality; the intended ranking is by
        descending quality.  Defaults to a geometric ladder so the
        planted ranking is strict.
    citing_activity : ndarray or None
        Positive per-journal citing propensity.  Defaults to all ones.
    dispersion : float
        Variance of the per-article gamma multiplier.  Small values
        approach Poisson citation counts; values above 1 give strongly
        skewed per-article totals.
    self_citation_boost : float
        Extra expected rate (as a fraction) for a journal citing itself.
    seed : int
        Seeds every random choice; equal configs generate equal datasets.
    """

    n_journals: int
    articles_per_journal: tuple[int, int] = (20, 40)
    quality: np.ndarray | None = None
    citing_activity: np.ndarray | None = None
    dispersion: float = 2.0
    self_citation_boost: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_journals < 2:
            raise ValueError("need at least 2 journals")
        lo, hi = self.articles_per_journal
        if not 1 <= lo <= hi:
            raise ValueError("articles_per_journal must satisfy 1 <= min <= max")
        if self.quality is not None:
            q = np.asarray(self.quality, dtype=np.float64)
            if q.shape != (self.n_journals,) or np.any(q <= 0):
                raise ValueError("quality must be positive with one entry per journal")
            object.__setattr__(self, "quality", q)
        if self.citing_activity is not None:
            act = np.asarray(self.citing_activity, dtype=np.float64)
            if act.shape != (self.n_journals,) or np.any(act <= 0):
                raise ValueError(
                    "citing_activity must be positive with one entry per journal"
                )
            object.__setattr__(self, "citing_activity", act)
        if self.dispersion <= 0:
            raise ValueError("dispersion must be positive")
        if self.self_citation_boost < 0:
            raise ValueError("self_citation_boost must be >= 0")

    @cached_property
    def quality_values(self) -> np.ndarray:
        if self.quality is not None:
            return self.quality
        return 0.75 ** np.arange(self.n_journals)

    @cached_property
    def activity_values(self) -> np.ndarray:
        if self.citing_activity is not None:
            return self.citing_activity
        return np.ones(self.n_journals)


@dataclass(frozen=True)
class SynthDataset:
    """Generated data plus the ranking the generator aimed for."""

    dataset: CitationDataset
    true_quality_rank: np.ndarray


def generate(cfg: SynthConfig) -> SynthDataset:
    """Generate one dataset.

    Expected citations from journal i to one article of journal j are
    ``quality[j] * activity[i] * (1 + boost if i == j) / articles[j]``,
    so a journal's expected citation total does not depend on how many
    articles it spreads its quality over.  Realized counts are Poisson
    draws around a per-article gamma multiplier with unit mean and
    variance ``dispersion``.

    Journals that end up giving zero citations are reported with a
    warning; callers decide whether to filter them out.
    """
    rng = np.random.default_rng(cfg.seed)
    j = cfg.n_journals
    lo, hi = cfg.articles_per_journal
    article_counts = rng.integers(lo, hi + 1, size=j)
    quality = cfg.quality_values
    activity = cfg.activity_values

    journals = tuple(
        Journal(
            issn=f"{idx + 1:04d}-{idx + 1:04d}",
            name=f"Synthetic Journal {idx + 1}",
            article_count=int(article_counts[idx]),
        )
        for idx in range(j)
    )
    article_journal = np.repeat(np.arange(j), article_counts)
    article_ids = tuple(
        f"{journals[owner].issn}:{k:05d}"
        for owner in range(j)
        for k in range(article_counts[owner])
    )

    # per-article rate multiplier: unit mean, variance = dispersion
    shape = 1.0 / cfg.dispersion
    multiplier = rng.gamma(shape, scale=cfg.dispersion, size=len(article_ids))

    per_article_mean = quality[article_journal] / article_counts[article_journal]
    mean = per_article_mean[:, None] * activity[None, :]
    if cfg.self_citation_boost:
        own = np.zeros((len(article_ids), j))
        own[np.arange(len(article_ids)), article_journal] = cfg.self_citation_boost
        mean = mean * (1.0 + own)
    counts_dense = rng.poisson(mean * multiplier[:, None])

    ds = CitationDataset(
        journals=journals,
        article_ids=article_ids,
        article_journal=article_journal.astype(np.int64),
        counts=sp.csr_matrix(counts_dense, dtype=np.int64),
    )
    given = np.asarray(ds.counts.sum(axis=0)).ravel()
    silent = np.flatnonzero(given == 0)
    if silent.size:
        warnings.warn(
            "journals gave zero citations: "
            + ", ".join(journals[i].issn for i in silent),
            stacklevel=2,
        )
    return SynthDataset(
        dataset=ds, true_quality_rank=empirical_ranks(quality).ranks
    )
