"""Recursive journal impact factors with bootstrap uncertainty.

The pipeline: load article-level citation data, aggregate it into a
journal-level cross-citation system, solve recursive impact scores by
power iteration, bootstrap the article sample to get score uncertainty,
and turn the draws into confidence sets for both scores and ranks.
"""

__version__ = "0.1.0"

from .bootstrap import (
    BootstrapConfig,
    BootstrapEnsemble,
    Resample,
    ResamplingMode,
    ScoreSummary,
    cluster_resample,
    load_ensemble,
    pooled_resample,
    resampled_system,
    run_bootstrap,
    save_ensemble,
    summarize_scores,
)
from .dataset import (
    CitationDataset,
    CrossCitationSystem,
    Journal,
    build_system,
    filter_low_citers,
    load_dataset,
    write_dataset,
)
from .errors import (
    ConvergenceError,
    DataValidationError,
    ResampleBudgetError,
    SingularSystemError,
)
from .impact import (
    EigenfactorConfig,
    ImpactVector,
    Method,
    Normalization,
    PowerIterationConfig,
    eigenfactor,
    invariant_rif,
    koczy_modified,
    liebowitz_palmer,
    rescale,
    simple_if,
)
from .rank_inference import (
    BandwidthMatrix,
    BandwidthMode,
    PairwiseSigma,
    RankConfidenceSet,
    RankEstimate,
    RankMethod,
    SigmaMode,
    ci_width_summary,
    empirical_ranks,
    goldstein_rank_ci,
    mogstad_critical_value,
    mogstad_critical_values,
    mogstad_rank_set,
    pairwise_sigma,
    ranks_per_draw,
    smoothed_ranks_per_draw,
    xie_bandwidth,
    xie_correction,
    xie_rank_ci,
    xie_smoothed_rank,
)
from .synth import SynthConfig, SynthDataset, generate

__all__ = [
    "__version__",
    "BandwidthMatrix",
    "BandwidthMode",
    "BootstrapConfig",
    "BootstrapEnsemble",
    "CitationDataset",
    "ConvergenceError",
    "CrossCitationSystem",
    "DataValidationError",
    "EigenfactorConfig",
    "ImpactVector",
    "Journal",
    "Method",
    "Normalization",
    "PairwiseSigma",
    "PowerIterationConfig",
    "RankConfidenceSet",
    "RankEstimate",
    "RankMethod",
    "Resample",
    "ResampleBudgetError",
    "ResamplingMode",
    "ScoreSummary",
    "SigmaMode",
    "SingularSystemError",
    "SynthConfig",
    "SynthDataset",
    "build_system",
    "ci_width_summary",
    "cluster_resample",
    "empirical_ranks",
    "eigenfactor",
    "filter_low_citers",
    "generate",
    "goldstein_rank_ci",
    "invariant_rif",
    "koczy_modified",
    "liebowitz_palmer",
    "load_dataset",
    "load_ensemble",
    "mogstad_critical_value",
    "mogstad_critical_values",
    "mogstad_rank_set",
    "pairwise_sigma",
    "pooled_resample",
    "ranks_per_draw",
    "rescale",
    "resampled_system",
    "run_bootstrap",
    "save_ensemble",
    "simple_if",
    "smoothed_ranks_per_draw",
    "summarize_scores",
    "write_dataset",
    "xie_bandwidth",
    "xie_correction",
    "xie_rank_ci",
    "xie_smoothed_rank",
]
