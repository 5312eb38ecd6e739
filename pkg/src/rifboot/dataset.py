"""Article-level citation data and the journal-level cross-citation system.

Input format
------------
Three UTF-8 CSV files with header rows:

``journals.csv``
    ``issn,name,article_count`` -- one row per journal; ``article_count``
    is the number of citable items the journal published in the window.
``articles.csv``
    ``article_id,issn`` -- one row per article, mapping it to the journal
    that published it.
``citations.csv``
    ``article_id,citing_issn,count`` -- number of times the citing journal
    referenced the article during the citation year.  Pairs that do not
    appear count as zero; duplicate pairs are rejected.

Articles are kept in a deterministic journal-major order: journals sorted
by ISSN, articles sorted by id within their journal.  Loading the same
files twice therefore produces identical in-memory layouts.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DataValidationError, SingularSystemError

log = logging.getLogger(__name__)

JOURNALS_COLUMNS = ("issn", "name", "article_count")
ARTICLES_COLUMNS = ("article_id", "issn")
CITATIONS_COLUMNS = ("article_id", "citing_issn", "count")

DEFAULT_MIN_OUTGOING = 12


@dataclass(frozen=True)
class Journal:
    """A journal identified by ISSN, with its citable-item count."""

    issn: str
    name: str
    article_count: int

    def __post_init__(self) -> None:
        if not self.issn:
            raise DataValidationError("journal with empty issn")
        if self.article_count < 1:
            raise DataValidationError(
                f"journal {self.issn!r}: article_count must be >= 1, "
                f"got {self.article_count}"
            )


@dataclass(frozen=True)
class CitationDataset:
    """Immutable article-level citation data for a fixed journal set.

    Attributes
    ----------
    journals : tuple of Journal
        Sorted by ISSN.
    article_ids : tuple of str
        Journal-major order; sorted by id within each journal.
    article_journal : ndarray of int
        Index into ``journals`` for each article.  Nondecreasing, so each
        journal owns a contiguous block of article rows.
    counts : scipy.sparse.csr_matrix
        Shape ``(n_articles, n_journals)``; ``counts[k, i]`` is the number
        of citations article ``k`` received from journal ``i``.
    """

    journals: tuple[Journal, ...]
    article_ids: tuple[str, ...]
    article_journal: np.ndarray
    counts: sp.csr_matrix

    def __post_init__(self) -> None:
        issns = [j.issn for j in self.journals]
        if len(set(issns)) != len(issns):
            raise DataValidationError("duplicate ISSNs in journal list")
        if list(issns) != sorted(issns):
            raise DataValidationError("journals must be sorted by ISSN")
        k, j = len(self.article_ids), len(self.journals)
        if self.article_journal.shape != (k,):
            raise DataValidationError("article_journal length does not match article_ids")
        if self.counts.shape != (k, j):
            raise DataValidationError(
                f"counts has shape {self.counts.shape}, expected ({k}, {j})"
            )
        if k and np.any(np.diff(self.article_journal) < 0):
            raise DataValidationError("article rows must be grouped journal-major")
        per_journal = np.bincount(self.article_journal, minlength=j)
        declared = np.array([jr.article_count for jr in self.journals])
        if not np.array_equal(per_journal, declared):
            bad = [issns[i] for i in np.nonzero(per_journal != declared)[0]]
            raise DataValidationError(
                f"article rows do not match declared article_count for: {', '.join(bad)}"
            )
        if len(set(self.article_ids)) != k:
            raise DataValidationError("duplicate article ids")
        if self.counts.nnz and self.counts.data.min() < 0:
            raise DataValidationError("negative citation count")

    @property
    def n_journals(self) -> int:
        return len(self.journals)

    @property
    def n_articles(self) -> int:
        return len(self.article_ids)

    @cached_property
    def issns(self) -> tuple[str, ...]:
        return tuple(j.issn for j in self.journals)

    @cached_property
    def article_counts(self) -> np.ndarray:
        return np.array([j.article_count for j in self.journals], dtype=np.int64)

    @cached_property
    def journal_offsets(self) -> np.ndarray:
        """Row-block boundaries: journal ``j`` owns article rows
        ``journal_offsets[j]:journal_offsets[j + 1]``."""
        offsets = np.zeros(self.n_journals + 1, dtype=np.int64)
        np.cumsum(self.article_counts, out=offsets[1:])
        return offsets

    def assignment_matrix(self) -> sp.csr_matrix:
        """Journal-by-article indicator matrix (one 1 per article column)."""
        data = np.ones(self.n_articles, dtype=np.int64)
        indices = np.arange(self.n_articles, dtype=np.int64)
        return sp.csr_matrix(
            (data, indices, self.journal_offsets),
            shape=(self.n_journals, self.n_articles),
        )


@dataclass(frozen=True)
class CrossCitationSystem:
    """Journal-level citation system.

    Attributes
    ----------
    cross_citations : ndarray, shape (J, J)
        ``cross_citations[j, i]`` is the number of citations journal ``j``
        received from journal ``i``.  Diagonal entries are self-citations.
    citations_given : ndarray, shape (J,)
        Column sums of ``cross_citations``; total citations each journal
        gave.  Strictly positive (the normalization it feeds must be
        invertible).
    article_counts : ndarray, shape (J,)
        Citable items per journal, strictly positive.
    """

    cross_citations: np.ndarray
    citations_given: np.ndarray
    article_counts: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.cross_citations)
        j = c.shape[0]
        if c.ndim != 2 or c.shape != (j, j):
            raise DataValidationError("cross_citations must be square")
        if c.size and c.min() < 0:
            raise DataValidationError("cross_citations must be nonnegative")
        if self.article_counts.shape != (j,) or np.any(self.article_counts <= 0):
            raise DataValidationError("article_counts must be positive, one per journal")
        if self.citations_given.shape != (j,):
            raise DataValidationError("citations_given must have one entry per journal")
        colsums = c.sum(axis=0)
        if not np.allclose(self.citations_given, colsums, rtol=1e-12, atol=0.0):
            raise DataValidationError("citations_given does not match column sums")
        zero = np.flatnonzero(self.citations_given == 0)
        if zero.size:
            raise SingularSystemError(
                f"journals giving zero citations make the system singular: "
                f"indices {zero.tolist()}"
            )

    @property
    def n_journals(self) -> int:
        return len(self.article_counts)


def _read_rows(path: str | Path, columns: tuple[str, ...]) -> list[dict[str, str]]:
    """Read one CSV file, enforcing the exact expected header."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataValidationError(f"{path}: empty file, expected header {columns}")
        if tuple(header) != columns:
            raise DataValidationError(
                f"{path}: expected header {','.join(columns)}, got {','.join(header)}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(columns):
                raise DataValidationError(f"{path}:{lineno}: expected {len(columns)} fields")
            rows.append(dict(zip(columns, row)))
    return rows


def _parse_positive_int(value: str, what: str, where: str) -> int:
    try:
        parsed = int(value)
    except ValueError:
        raise DataValidationError(f"{where}: {what} {value!r} is not an integer")
    if parsed < 1:
        raise DataValidationError(f"{where}: {what} must be >= 1, got {parsed}")
    return parsed


def load_dataset(
    journals_path: str | Path,
    articles_path: str | Path,
    citations_path: str | Path,
) -> CitationDataset:
    """Load and cross-validate the three-file citation dataset.

    Parameters
    ----------
    journals_path, articles_path, citations_path : path-like
        CSV files in the format documented at module level.

    Returns
    -------
    CitationDataset

    Raises
    ------
    DataValidationError
        On schema violations, unknown identifiers, declared article counts
        that do not match the article rows, or duplicate citation pairs.
    """
    journal_rows = _read_rows(journals_path, JOURNALS_COLUMNS)
    journals = sorted(
        (
            Journal(
                issn=row["issn"],
                name=row["name"],
                article_count=_parse_positive_int(
                    row["article_count"], "article_count", str(journals_path)
                ),
            )
            for row in journal_rows
        ),
        key=lambda j: j.issn,
    )
    issn_index = {j.issn: idx for idx, j in enumerate(journals)}
    if len(issn_index) != len(journals):
        raise DataValidationError(f"{journals_path}: duplicate ISSN")

    article_rows = _read_rows(articles_path, ARTICLES_COLUMNS)
    by_journal: list[list[str]] = [[] for _ in journals]
    seen_articles: set[str] = set()
    for row in article_rows:
        art, issn = row["article_id"], row["issn"]
        if not art:
            raise DataValidationError(f"{articles_path}: empty article_id")
        if art in seen_articles:
            raise DataValidationError(f"{articles_path}: duplicate article_id {art!r}")
        seen_articles.add(art)
        if issn not in issn_index:
            raise DataValidationError(
                f"{articles_path}: article {art!r} references unknown journal {issn!r}"
            )
        by_journal[issn_index[issn]].append(art)

    for journal, ids in zip(journals, by_journal):
        if len(ids) != journal.article_count:
            raise DataValidationError(
                f"journal {journal.issn!r} declares {journal.article_count} articles "
                f"but {articles_path} lists {len(ids)}"
            )

    article_ids: list[str] = []
    article_journal: list[int] = []
    for idx, ids in enumerate(by_journal):
        ids.sort()
        article_ids.extend(ids)
        article_journal.extend([idx] * len(ids))
    article_index = {art: k for k, art in enumerate(article_ids)}

    citation_rows = _read_rows(citations_path, CITATIONS_COLUMNS)
    seen_pairs: set[tuple[str, str]] = set()
    data = np.empty(len(citation_rows), dtype=np.int64)
    rows_idx = np.empty(len(citation_rows), dtype=np.int64)
    cols_idx = np.empty(len(citation_rows), dtype=np.int64)
    for n, row in enumerate(citation_rows):
        art, citing = row["article_id"], row["citing_issn"]
        if art not in article_index:
            raise DataValidationError(
                f"{citations_path}: citation references unknown article {art!r}"
            )
        if citing not in issn_index:
            raise DataValidationError(
                f"{citations_path}: citation references unknown journal {citing!r}"
            )
        pair = (art, citing)
        if pair in seen_pairs:
            raise DataValidationError(
                f"{citations_path}: duplicate citation pair ({art!r}, {citing!r})"
            )
        seen_pairs.add(pair)
        data[n] = _parse_positive_int(row["count"], "count", str(citations_path))
        rows_idx[n] = article_index[art]
        cols_idx[n] = issn_index[citing]

    counts = sp.csr_matrix(
        (data, (rows_idx, cols_idx)),
        shape=(len(article_ids), len(journals)),
        dtype=np.int64,
    )
    return CitationDataset(
        journals=tuple(journals),
        article_ids=tuple(article_ids),
        article_journal=np.asarray(article_journal, dtype=np.int64),
        counts=counts,
    )


def write_dataset(
    ds: CitationDataset,
    journals_path: str | Path,
    articles_path: str | Path,
    citations_path: str | Path,
) -> None:
    """Write a dataset back out in the three-file CSV format.

    Emits rows in the dataset's deterministic order, so writing the same
    dataset twice produces byte-identical files.
    """
    with open(journals_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(JOURNALS_COLUMNS)
        for journal in ds.journals:
            writer.writerow([journal.issn, journal.name, journal.article_count])
    with open(articles_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ARTICLES_COLUMNS)
        for art, jidx in zip(ds.article_ids, ds.article_journal):
            writer.writerow([art, ds.journals[jidx].issn])
    coo = ds.counts.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(citations_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CITATIONS_COLUMNS)
        for n in order:
            writer.writerow(
                [ds.article_ids[coo.row[n]], ds.journals[coo.col[n]].issn, coo.data[n]]
            )


def _subset(ds: CitationDataset, keep: np.ndarray) -> CitationDataset:
    """Restrict a dataset to the journals flagged in the boolean mask,
    dropping their article rows and their citing columns symmetrically."""
    keep_journals = tuple(j for j, k in zip(ds.journals, keep) if k)
    row_mask = keep[ds.article_journal]
    old_to_new = np.cumsum(keep) - 1
    return CitationDataset(
        journals=keep_journals,
        article_ids=tuple(np.asarray(ds.article_ids, dtype=object)[row_mask]),
        article_journal=old_to_new[ds.article_journal[row_mask]],
        counts=ds.counts[row_mask][:, np.flatnonzero(keep)].tocsr(),
    )


def filter_low_citers(
    ds: CitationDataset, min_outgoing: int = DEFAULT_MIN_OUTGOING
) -> tuple[CitationDataset, list[tuple[Journal, int]]]:
    """Iteratively drop journals that give too few citations.

    A journal's outgoing count is the column sum of the journal-level
    cross-citation matrix restricted to the journals still present, i.e.
    the citations it gave to the remaining set (self-citations included).
    Dropping a journal lowers other journals' counts, so passes repeat
    until a fixed point.

    Parameters
    ----------
    ds : CitationDataset
    min_outgoing : int
        Journals giving fewer than this many citations are removed.

    Returns
    -------
    (CitationDataset, list of (Journal, int))
        The filtered dataset, and the removed journals paired with their
        outgoing counts at the pass in which they were removed.

    Raises
    ------
    DataValidationError
        If fewer than 2 journals survive.
    """
    cross = (ds.assignment_matrix() @ ds.counts).toarray()
    keep = np.ones(ds.n_journals, dtype=bool)
    removed: list[tuple[Journal, int]] = []
    while True:
        outgoing = cross[keep][:, keep].sum(axis=0)
        kept_idx = np.flatnonzero(keep)
        low = outgoing < min_outgoing
        if not low.any():
            break
        # record counts per dropped journal, then drop them all at once
        removed.extend(
            (ds.journals[i], int(c)) for i, c in zip(kept_idx[low], outgoing[low])
        )
        keep[kept_idx[low]] = False
        if keep.sum() < 2:
            raise DataValidationError(
                f"filtering at min_outgoing={min_outgoing} leaves fewer than 2 journals"
            )
    if not removed:
        return ds, []
    log.info(
        "filtered %d low-citing journal(s): %s",
        len(removed),
        ", ".join(f"{j.issn} ({c})" for j, c in removed),
    )
    return _subset(ds, keep), removed


def build_system(ds: CitationDataset) -> CrossCitationSystem:
    """Aggregate article-level counts into the journal-level system.

    The cross-citation matrix is the exact integer aggregation of article
    rows by publishing journal; no information is lost beyond the
    article-level detail itself.

    Raises
    ------
    SingularSystemError
        If any journal gave zero citations in total.
    """
    cross = (ds.assignment_matrix() @ ds.counts).toarray().astype(np.int64)
    given = cross.sum(axis=0)
    zero = np.flatnonzero(given == 0)
    if zero.size:
        names = ", ".join(ds.journals[i].issn for i in zero)
        raise SingularSystemError(f"journals giving zero citations: {names}")
    return CrossCitationSystem(
        cross_citations=cross,
        citations_given=given,
        article_counts=ds.article_counts.copy(),
    )
