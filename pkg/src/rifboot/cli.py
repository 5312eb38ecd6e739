"""Command line interface.

Subcommands
-----------
``compute``
    Load a three-file citation dataset, filter low-citing journals, solve
    the recursive impact factor, bootstrap it, and write ``results.csv``
    (scores, standard errors, score and rank confidence intervals),
    ``ensemble.csv`` (the raw bootstrap draws), and ``eigenfactor.csv``.
``ranks``
    Recompute rank confidence sets from a saved ensemble without
    rerunning the bootstrap.
``plot``
    Render score and rank interval figures (SVG) from ``results.csv``.
``synth``
    Generate a synthetic dataset with a planted quality ranking.

Exit codes: 0 success, 1 usage error, 2 data validation failure,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bootstrap import (
    BootstrapConfig,
    BootstrapEnsemble,
    ResamplingMode,
    load_ensemble,
    run_bootstrap,
    save_ensemble,
    summarize_scores,
)
from .dataset import build_system, filter_low_citers, load_dataset, write_dataset
from .errors import (
    ConvergenceError,
    DataValidationError,
    ResampleBudgetError,
    SingularSystemError,
)
from .impact import (
    EigenfactorConfig,
    Normalization,
    PowerIterationConfig,
    eigenfactor,
    invariant_rif,
    rescale,
    simple_if,
)
from .plots import rank_interval_figure, score_interval_figure
from .rank_inference import (
    BandwidthMode,
    SigmaMode,
    empirical_ranks,
    goldstein_rank_ci,
    mogstad_critical_values,
    mogstad_rank_set,
    pairwise_sigma,
    xie_bandwidth,
    xie_rank_ci,
)
from .synth import SynthConfig, generate

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

METHOD_NAMES = ("goldstein", "xie", "xie_sigmadiff", "mogstad", "mogstad_cov")
BASE_COLUMNS = (
    "rank",
    "issn",
    "name",
    "rif",
    "rif_top100",
    "se",
    "ci_lo",
    "ci_hi",
    "simple_if",
)
NORM_CHOICES = {
    "unit": Normalization.UNIT_EUCLIDEAN,
    "top100": Normalization.TOP100,
    "sum1": Normalization.SUM_ONE,
    "raw": Normalization.RAW,
}


class UsageError(Exception):
    """Bad flag combinations detected after parsing."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems by default; this tool reserves 2
    # for data validation, so remap
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    """Validated settings shared by the computing subcommands."""

    alpha: float = 0.05
    replications: int = 1000
    seed: int = 0
    workers: int = 1
    methods: tuple[str, ...] = METHOD_NAMES
    min_outgoing: int = 12
    norm: Normalization = Normalization.UNIT_EUCLIDEAN
    paper_faithful: bool = False
    rho: float = 0.85
    beta: float = 0.5
    bandwidth_mode: BandwidthMode = BandwidthMode.XIE_IQR
    sigma_mode: SigmaMode = SigmaMode.INDEPENDENT_SUM

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 0.5:
            raise UsageError(f"--alpha must lie in (0, 0.5), got {self.alpha}")
        if self.replications < 1:
            raise UsageError("--bootstrap must be >= 1")
        if self.workers < 1:
            raise UsageError("--workers must be >= 1")
        if not self.methods:
            raise UsageError("--methods must name at least one method")
        for m in self.methods:
            if m not in METHOD_NAMES:
                raise UsageError(
                    f"unknown method {m!r}; choose from {', '.join(METHOD_NAMES)}"
                )

    @property
    def empirical_iterations(self) -> PowerIterationConfig:
        if self.paper_faithful:
            return PowerIterationConfig.fixed(20)
        return PowerIterationConfig()

    @property
    def bootstrap_iterations(self) -> PowerIterationConfig:
        if self.paper_faithful:
            return PowerIterationConfig.fixed(10)
        return PowerIterationConfig()


def _parse_methods(text: str) -> tuple[str, ...]:
    names = tuple(m.strip() for m in text.split(",") if m.strip())
    # canonical order, duplicates dropped; unknown names kept for validation
    known = tuple(m for m in METHOD_NAMES if m in names)
    return known + tuple(m for m in names if m not in METHOD_NAMES)


def _fmt(value: float) -> str:
    """Stable CSV number format: integers bare, floats at 12 significant
    digits (identical across runs for identical inputs)."""
    x = float(value)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return format(x, ".12g")


def _rank_sets(
    ens: BootstrapEnsemble, cfg: RunConfig
) -> dict[str, "object"]:
    """Compute the requested rank confidence sets, sharing sigma matrices
    between methods that need the same one."""
    sets: dict[str, object] = {}
    sigma_cache: dict[SigmaMode, object] = {}

    def sigma(mode: SigmaMode):
        if mode not in sigma_cache:
            sigma_cache[mode] = pairwise_sigma(ens, mode)
        return sigma_cache[mode]

    for name in cfg.methods:
        if name == "goldstein":
            sets[name] = goldstein_rank_ci(ens, cfg.alpha)
        elif name == "xie":
            tau = xie_bandwidth(
                ens.empirical, sigma(cfg.sigma_mode), cfg.bandwidth_mode, cfg.beta
            )
            sets[name] = xie_rank_ci(ens, tau, cfg.alpha)
        elif name == "xie_sigmadiff":
            tau = xie_bandwidth(
                ens.empirical,
                sigma(SigmaMode.INDEPENDENT_SUM),
                BandwidthMode.SIGMA_DIFF,
                cfg.beta,
            )
            sets[name] = xie_rank_ci(ens, tau, cfg.alpha)
        elif name == "mogstad":
            sig = sigma(cfg.sigma_mode)
            crit = mogstad_critical_values(ens, sig, cfg.alpha)
            sets[name] = mogstad_rank_set(ens.empirical, sig, crit, cfg.alpha)
        elif name == "mogstad_cov":
            sig = sigma(SigmaMode.COVARIANCE_ADJUSTED)
            crit = mogstad_critical_values(ens, sig, cfg.alpha)
            sets[name] = mogstad_rank_set(ens.empirical, sig, crit, cfg.alpha)
    return sets


def _print_widths(sets: dict[str, "object"]) -> None:
    for name, ci in sets.items():
        print(f"width[{name}]={ci.widths().mean():.2f}")


def cmd_compute(args: argparse.Namespace) -> int:
    cfg = RunConfig(
        alpha=args.alpha,
        replications=args.bootstrap,
        seed=args.seed,
        workers=args.workers,
        methods=args.methods,
        min_outgoing=args.min_out_citations,
        norm=NORM_CHOICES[args.norm],
        paper_faithful=args.paper_faithful,
        rho=args.rho,
        beta=args.beta,
        bandwidth_mode=BandwidthMode(args.bandwidth_mode),
        sigma_mode=SigmaMode(args.sigma_mode),
    )
    paths = [Path(args.journals), Path(args.articles), Path(args.citations)]
    if len({p.resolve() for p in paths}) != 3:
        raise UsageError("--journals, --articles and --citations must be distinct files")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    ds = load_dataset(*paths)
    ds, removed = filter_low_citers(ds, cfg.min_outgoing)
    for journal, outgoing in removed:
        print(
            f"filtered {journal.issn} ({journal.name}): {outgoing} outgoing citations",
            file=sys.stderr,
        )
    system = build_system(ds)
    simple = simple_if(system)
    empirical = invariant_rif(system, simple, cfg.empirical_iterations)

    boot_cfg = BootstrapConfig(
        replications=cfg.replications,
        master_seed=cfg.seed,
        mode=ResamplingMode.CLUSTER_WITHIN_JOURNAL,
    )
    ens = run_bootstrap(
        ds, system, empirical, boot_cfg, cfg.bootstrap_iterations, workers=cfg.workers
    )
    save_ensemble(ens, ds.issns, out / "ensemble.csv")

    summary = summarize_scores(ens, cfg.alpha)
    sets = _rank_sets(ens, cfg)
    ranks = empirical_ranks(empirical).ranks

    scale = _norm_factor(empirical.scores, cfg.norm)
    top100 = rescale(empirical, Normalization.TOP100)
    columns = list(BASE_COLUMNS) + [
        f"{name}_{side}" for name in cfg.methods for side in ("lo", "hi")
    ]
    order = np.lexsort((ds.issns, ranks))
    with open(out / "results.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for j in order:
            row = [
                _fmt(ranks[j]),
                ds.journals[j].issn,
                ds.journals[j].name,
                _fmt(empirical.scores[j] * scale),
                _fmt(top100.scores[j]),
                _fmt(summary.standard_error[j] * scale),
                _fmt(summary.ci_lower[j] * scale),
                _fmt(summary.ci_upper[j] * scale),
                _fmt(simple.scores[j]),
            ]
            for name in cfg.methods:
                ci = sets[name]
                row.extend([str(int(ci.lower[j])), str(int(ci.upper[j]))])
            writer.writerow(row)

    _write_eigenfactor(system, ds, cfg, out)

    print(f"journals: {ds.n_journals} ({len(removed)} filtered)")
    print(f"replications: {ens.config.replications}  redraws: {ens.redraw_count}")
    _print_widths(sets)
    print(f"wrote {out / 'results.csv'}")
    return EXIT_OK


def _norm_factor(scores: np.ndarray, norm: Normalization) -> float:
    """Scalar that converts unit-Euclidean scores to the requested
    normalization; standard errors and interval endpoints scale by the
    same factor."""
    if norm is Normalization.SUM_ONE:
        return 1.0 / float(scores.sum())
    if norm is Normalization.TOP100:
        return 100.0 / float(scores.max())
    return 1.0


def _write_eigenfactor(system, ds, cfg: RunConfig, out: Path) -> None:
    try:
        ef, ai = eigenfactor(system, EigenfactorConfig(rho=cfg.rho))
    except SingularSystemError as exc:
        log.warning("skipping eigenfactor output: %s", exc)
        return
    with open(out / "eigenfactor.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["issn", "name", "eigenfactor", "article_influence"])
        for j, journal in enumerate(ds.journals):
            writer.writerow(
                [journal.issn, journal.name, _fmt(ef.scores[j]), _fmt(ai.scores[j])]
            )


def cmd_ranks(args: argparse.Namespace) -> int:
    cfg = RunConfig(
        alpha=args.alpha,
        methods=args.methods,
        beta=args.beta,
        bandwidth_mode=BandwidthMode(args.bandwidth_mode),
        sigma_mode=SigmaMode(args.sigma_mode),
    )
    ens, issns = load_ensemble(args.ensemble)
    sets = _rank_sets(ens, cfg)
    ranks = empirical_ranks(ens.empirical).ranks
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    columns = ["issn", "empirical_rank"] + [
        f"{name}_{side}" for name in cfg.methods for side in ("lo", "hi")
    ]
    with open(out / "ranks.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for j, issn in enumerate(issns):
            row = [issn, _fmt(ranks[j])]
            for name in cfg.methods:
                ci = sets[name]
                row.extend([str(int(ci.lower[j])), str(int(ci.upper[j]))])
            writer.writerow(row)
    _print_widths(sets)
    print(f"wrote {out / 'ranks.csv'}")
    return EXIT_OK


def _read_results(path: str | Path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise DataValidationError(f"{path}: no result rows to plot")
    missing = [c for c in BASE_COLUMNS if c not in rows[0]]
    if missing:
        raise DataValidationError(f"{path}: missing columns: {', '.join(missing)}")
    return rows


def cmd_plot(args: argparse.Namespace) -> int:
    rows = _read_results(args.results)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    positions = np.arange(1, len(rows) + 1, dtype=float)
    rank = np.array([float(r["rank"]) for r in rows])
    rif = np.array([float(r["rif"]) for r in rows])
    lo = np.array([float(r["ci_lo"]) for r in rows])
    hi = np.array([float(r["ci_hi"]) for r in rows])
    score_interval_figure(positions, rif, lo, hi, out / "scores_arithmetic.svg")
    score_interval_figure(
        positions, rif, lo, hi, out / "scores_log.svg", log_scale=True
    )
    intervals = {}
    for name in METHOD_NAMES:
        if f"{name}_lo" in rows[0]:
            intervals[name] = (
                np.array([float(r[f"{name}_lo"]) for r in rows]),
                np.array([float(r[f"{name}_hi"]) for r in rows]),
            )
    if not intervals:
        raise DataValidationError(f"{args.results}: no rank interval columns found")
    rank_interval_figure(positions, rank, intervals, out / "rank_intervals.svg")
    for name in ("scores_arithmetic.svg", "scores_log.svg", "rank_intervals.svg"):
        print(f"wrote {out / name}")
    return EXIT_OK


def _parse_vector(text: str | None, what: str) -> np.ndarray | None:
    if text is None:
        return None
    try:
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise UsageError(f"--{what} must be a comma-separated list of numbers")


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = SynthConfig(
        n_journals=args.n_journals,
        articles_per_journal=(args.articles_min, args.articles_max),
        quality=_parse_vector(args.quality, "quality"),
        citing_activity=_parse_vector(args.citing_activity, "citing-activity"),
        dispersion=args.dispersion,
        self_citation_boost=args.self_citation_boost,
        seed=args.seed,
    )
    result = generate(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_dataset(
        result.dataset,
        out / "journals.csv",
        out / "articles.csv",
        out / "citations.csv",
    )
    print(f"journals: {result.dataset.n_journals}")
    print(f"articles: {result.dataset.n_articles}")
    planted = ", ".join(
        f"{journal.issn}:{int(rank) if rank == int(rank) else rank}"
        for journal, rank in zip(result.dataset.journals, result.true_quality_rank)
    )
    print(f"planted ranks: {planted}")
    for name in ("journals.csv", "articles.csv", "citations.csv"):
        print(f"wrote {out / name}")
    return EXIT_OK


def _add_rank_method_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--alpha", type=float, default=0.05, help="two-sided miscoverage level"
    )
    parser.add_argument(
        "--methods",
        type=_parse_methods,
        default=METHOD_NAMES,
        help="comma-separated rank CI methods (default: all)",
    )
    parser.add_argument(
        "--beta",
        type=float,
        default=0.5,
        help="bandwidth exponent for the smoothed-rank kernel",
    )
    parser.add_argument(
        "--bandwidth-mode",
        choices=[m.value for m in BandwidthMode],
        default=BandwidthMode.XIE_IQR.value,
        help="bandwidth rule for the xie method",
    )
    parser.add_argument(
        "--sigma-mode",
        choices=[m.value for m in SigmaMode],
        default=SigmaMode.INDEPENDENT_SUM.value,
        help="pairwise sigma rule for the xie and mogstad methods",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="rifboot",
        description="Recursive journal impact factors with uncertainty.",
    )
    parser.add_argument("--version", action="version", version=f"rifboot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    compute = sub.add_parser("compute", help="solve, bootstrap, and write results")
    compute.add_argument("--journals", required=True, help="journals.csv path")
    compute.add_argument("--articles", required=True, help="articles.csv path")
    compute.add_argument("--citations", required=True, help="citations.csv path")
    compute.add_argument("--out", required=True, help="output directory")
    compute.add_argument(
        "--bootstrap", type=int, default=1000, help="bootstrap replications"
    )
    compute.add_argument("--seed", type=int, default=0, help="master random seed")
    compute.add_argument(
        "--workers", type=int, default=1, help="threads for the bootstrap loop"
    )
    compute.add_argument(
        "--min-out-citations",
        type=int,
        default=12,
        help="drop journals giving fewer citations than this",
    )
    compute.add_argument(
        "--norm",
        choices=sorted(NORM_CHOICES),
        default="unit",
        help="normalization of the rif/se/ci columns",
    )
    compute.add_argument(
        "--paper-faithful",
        action="store_true",
        help="fixed 20/10 power iterations instead of the residual rule",
    )
    compute.add_argument(
        "--rho", type=float, default=0.85, help="damping for the eigenfactor output"
    )
    _add_rank_method_flags(compute)
    compute.set_defaults(func=cmd_compute)

    ranks = sub.add_parser("ranks", help="rank CIs from a saved ensemble")
    ranks.add_argument("ensemble", help="ensemble.csv written by compute")
    ranks.add_argument("--out", required=True, help="output directory")
    _add_rank_method_flags(ranks)
    ranks.set_defaults(func=cmd_ranks)

    plot = sub.add_parser("plot", help="render figures from results.csv")
    plot.add_argument("results", help="results.csv written by compute")
    plot.add_argument("--out", required=True, help="output directory")
    plot.set_defaults(func=cmd_plot)

    synth = sub.add_parser("synth", help="generate a synthetic dataset")
    synth.add_argument("--n-journals", type=int, required=True)
    synth.add_argument("--articles-min", type=int, default=20)
    synth.add_argument("--articles-max", type=int, default=40)
    synth.add_argument("--quality", help="comma-separated positive qualities")
    synth.add_argument("--citing-activity", help="comma-separated positive activities")
    synth.add_argument("--dispersion", type=float, default=2.0)
    synth.add_argument("--self-citation-boost", type=float, default=0.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True, help="output directory")
    synth.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConvergenceError, SingularSystemError, ResampleBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
