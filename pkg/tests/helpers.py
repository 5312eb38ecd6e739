"""Shared fixture builders and independent oracles.

Oracles here are deliberately naive reimplementations (dense algebra,
scalar loops, library eigensolvers) so that agreement with the package
is evidence, not tautology.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from rifboot import CitationDataset, CrossCitationSystem, Journal


def make_dataset(
    article_counts: list[int], cites: dict[tuple[int, int], int]
) -> CitationDataset:
    """Build a dataset from per-journal article counts and a sparse map of
    (article index, citing journal index) -> count."""
    n = len(article_counts)
    journals = tuple(
        Journal(issn=f"{i + 1:04d}-{i + 1:04d}", name=f"Journal {i + 1}", article_count=c)
        for i, c in enumerate(article_counts)
    )
    total = sum(article_counts)
    article_journal = np.repeat(np.arange(n), article_counts).astype(np.int64)
    article_ids = tuple(
        f"{journals[j].issn}:{k:05d}"
        for j in range(n)
        for k in range(article_counts[j])
    )
    dense = np.zeros((total, n), dtype=np.int64)
    for (k, i), c in cites.items():
        dense[k, i] = c
    return CitationDataset(
        journals=journals,
        article_ids=article_ids,
        article_journal=article_journal,
        counts=sp.csr_matrix(dense, dtype=np.int64),
    )


def hand_dataset() -> CitationDataset:
    """Three journals with article counts (2, 2, 1).

    Cross-citation matrix aggregated by hand:
        received by journal 1: rows 0+1 -> [0, 4, 1]
        received by journal 2: rows 2+3 -> [3, 0, 2]
        received by journal 3: row 4    -> [1, 1, 0]
    """
    cites = {
        (0, 1): 3,
        (0, 2): 1,
        (1, 1): 1,
        (2, 0): 2,
        (3, 0): 1,
        (3, 2): 2,
        (4, 0): 1,
        (4, 1): 1,
    }
    return make_dataset([2, 2, 1], cites)


HAND_CROSS = np.array([[0, 4, 1], [3, 0, 2], [1, 1, 0]], dtype=np.int64)
HAND_GIVEN = np.array([4, 5, 3], dtype=np.int64)
HAND_ARTICLES = np.array([2, 2, 1], dtype=np.int64)
HAND_SIMPLE_IF = np.array([2.5, 2.5, 2.0])


def random_dataset(
    rng: np.random.Generator,
    n_journals: int = 4,
    articles: tuple[int, int] = (2, 5),
    max_count: int = 6,
    density: float = 0.5,
) -> CitationDataset:
    """Random article-level data guaranteed to build a valid system."""
    counts = rng.integers(articles[0], articles[1] + 1, size=n_journals)
    total = int(counts.sum())
    dense = rng.integers(1, max_count + 1, size=(total, n_journals))
    dense *= rng.random((total, n_journals)) < density
    # every journal must give at least one citation
    for i in np.flatnonzero(dense.sum(axis=0) == 0):
        dense[rng.integers(total), i] = 1
    cites = {
        (int(k), int(i)): int(dense[k, i])
        for k, i in zip(*np.nonzero(dense))
    }
    return make_dataset([int(c) for c in counts], cites)


def random_system(
    rng: np.random.Generator, n_journals: int, low: int = 1, high: int = 50
) -> CrossCitationSystem:
    """Random strictly positive cross-citation system (healthy spectral gap)."""
    cross = rng.integers(low, high + 1, size=(n_journals, n_journals)).astype(np.int64)
    return CrossCitationSystem(
        cross_citations=cross,
        citations_given=cross.sum(axis=0),
        article_counts=rng.integers(1, 9, size=n_journals).astype(np.int64),
    )


def dominant_eigvec(m: np.ndarray) -> np.ndarray:
    """Dense eigensolver oracle: unit eigenvector of the eigenvalue with
    the largest magnitude, sign-fixed to a positive dominant entry."""
    vals, vecs = np.linalg.eig(m)
    k = int(np.argmax(np.abs(vals)))
    v = np.real(vecs[:, k])
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v / np.linalg.norm(v)


def invariant_matrix(system: CrossCitationSystem) -> np.ndarray:
    a = system.article_counts.astype(float)
    d = system.citations_given.astype(float)
    return np.diag(1.0 / a) @ system.cross_citations @ np.diag(1.0 / d) @ np.diag(a)


def lp_matrix(system: CrossCitationSystem) -> np.ndarray:
    a = system.article_counts.astype(float)
    return np.diag(1.0 / a) @ system.cross_citations


def koczy_matrix(system: CrossCitationSystem) -> np.ndarray:
    d = system.citations_given.astype(float)
    return np.diag(1.0 / d) @ system.cross_citations


def sorted_midranks(scores: np.ndarray) -> np.ndarray:
    """Sorting-based midrank oracle (descending; ties share the average)."""
    scores = np.asarray(scores, dtype=float)
    order = np.argsort(-scores, kind="stable")
    ranks = np.empty(len(scores))
    pos = 0
    while pos < len(scores):
        end = pos
        while end + 1 < len(scores) and scores[order[end + 1]] == scores[order[pos]]:
            end += 1
        mid = (pos + 1 + end + 1) / 2.0
        for t in range(pos, end + 1):
            ranks[order[t]] = mid
        pos = end + 1
    return ranks
