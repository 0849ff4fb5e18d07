"""Field- and time-normalized impact indicators for sparse count data.

Group-level indicators (EMNPC, MNPC, MHq) over category-by-year stratified
2x2 cross tables, with closed-form and bootstrap confidence intervals, plus
ingestion, cohort construction, and a synthetic-data generator for
validating that the indicators can separate planted quality tiers.
"""

from .bootstrap import BootstrapConfig, bootstrap_ci, bootstrap_replicates
from .cohort import (
    FilterConfig,
    FilterOutcome,
    QualityGroup,
    average_recommendation_score,
    build_strata,
    classify_quality_group,
    filter_strata,
    group_membership,
    quality_group,
    recommended_record_ids,
    restrict_to_recommended_categories,
)
from .errors import SparseNormError
from .indicators import (
    CiKind,
    Indicator,
    IndicatorEstimate,
    MhAuxiliaries,
    PaperScore,
    StratifiedTable,
    StratumCounts,
    StratumKey,
    ZeroPolicy,
    apply_continuity_correction,
    apply_zero_policy,
    compute_indicator,
    emnpc,
    equalized_proportion,
    mh_auxiliaries,
    mhq,
    mnpc,
    mnpc_ci,
    mnpc_scores,
    mnpc_stratum_ci,
    mnpc_weighted,
    needs_zero_correction,
    proportion_mentioned,
    world_proportions,
)
from .ingest import (
    DatasetManifest,
    join_mentions,
    load_dataset,
    load_manifest,
    parse_publications,
    parse_recommendations,
    write_manifest,
    write_mentions,
    write_publications,
    write_recommendations,
)
from .records import MentionSource, PublicationRecord
from .synth import (
    SynthConfig,
    StratumSpec,
    TierSpec,
    benchmark_tier_config,
    discrimination_contrast_config,
    expected_mhq,
    generate,
    write_dataset,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
