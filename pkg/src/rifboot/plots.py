"""Vector-graphic figures for score and rank uncertainty."""

from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

log = logging.getLogger(__name__)

# outer to inner: wide light bands behind narrow dark ones
_RANK_STYLE = {
    "mogstad": {"linewidth": 7.0, "color": "#c6dbef"},
    "mogstad_cov": {"linewidth": 7.0, "color": "#c6dbef"},
    "xie": {"linewidth": 4.0, "color": "#6baed6"},
    "xie_sigmadiff": {"linewidth": 4.0, "color": "#6baed6"},
    "goldstein": {"linewidth": 1.6, "color": "#08306b"},
}


def score_interval_figure(
    positions: np.ndarray,
    scores: np.ndarray,
    ci_lower: np.ndarray,
    ci_upper: np.ndarray,
    path: str | Path,
    log_scale: bool = False,
    ylabel: str = "recursive impact factor",
) -> None:
    """Scores by rank position with vertical confidence bands.

    On a log axis nonpositive interval bounds cannot be drawn; they are
    clamped to the smallest positive value present, with a warning.
    """
    lo = np.asarray(ci_lower, dtype=float).copy()
    hi = np.asarray(ci_upper, dtype=float).copy()
    y = np.asarray(scores, dtype=float)
    if log_scale:
        positive = np.concatenate([lo[lo > 0], y[y > 0]])
        if positive.size == 0:
            raise ValueError("no positive values to draw on a log scale")
        floor = positive.min()
        bad = lo <= 0
        if bad.any():
            log.warning(
                "clamped %d nonpositive lower bounds to %g for log scale",
                int(bad.sum()),
                floor,
            )
            lo[bad] = floor
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    ax.vlines(positions, lo, hi, color="#9ecae1", linewidth=2.0, label="score CI")
    ax.plot(positions, y, ".", color="#08306b", markersize=4, label="estimate")
    if log_scale:
        ax.set_yscale("log")
    ax.set_xlabel("rank")
    ax.set_ylabel(ylabel)
    ax.legend(loc="upper right", frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def rank_interval_figure(
    positions: np.ndarray,
    empirical_rank: np.ndarray,
    intervals: dict[str, tuple[np.ndarray, np.ndarray]],
    path: str | Path,
) -> None:
    """Nested rank intervals, one vertical bar stack per journal.

    ``intervals`` maps method names to (lower, upper) arrays; methods are
    drawn widest first so narrower ones sit on top.  Rank 1 is at the top
    of the axis.
    """
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    order = [name for name in _RANK_STYLE if name in intervals]
    for name in order:
        lo, hi = intervals[name]
        style = _RANK_STYLE[name]
        ax.vlines(positions, lo, hi, label=name, **style)
    ax.plot(
        positions,
        empirical_rank,
        ".",
        color="black",
        markersize=3,
        label="empirical rank",
    )
    ax.set_xlabel("journal (by empirical rank)")
    ax.set_ylabel("rank")
    ax.invert_yaxis()
    ax.legend(loc="upper right", frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
