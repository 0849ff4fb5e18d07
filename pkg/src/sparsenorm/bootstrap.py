"""Seeded resampling confidence intervals for the three indicators.

The sampling unit is the publication: each replicate redraws the group's
papers with replacement, with every paper carrying its full set of category
assignments and its mentioned flag, then rebuilds the cross tables and
recomputes the indicator.  World cells stay fixed unless ``resample_world``
is set, in which case the whole record set is resampled once per replicate
and the group cells are taken from the group members inside that resample
(which keeps the group inside the world).

Intervals are plain percentile intervals over the replicate values, which
keeps them deterministic and easy to reason about; bias-corrected variants
are deliberately out of scope.  Replicate i draws from a PCG64 stream
seeded with ``seed XOR i``, so replicates are order-independent and could
run in parallel without changing the result.  Papers sharing the same
(assignments, mentioned, membership) signature are exchangeable, so the
implementation draws one multinomial over these signature classes instead
of resampling papers one by one; the distribution is identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .cohort import FilterConfig, build_strata, filter_strata, WORLD_INCLUSIVE
from .errors import (
    DegenerateReplicatesError,
    EmptyGroupError,
    InvalidConfigError,
    SparseNormError,
    ZeroDenominatorError,
)
from .indicators import (
    CiKind,
    Indicator,
    IndicatorEstimate,
    StratifiedTable,
    StratumCounts,
    StratumKey,
    ZeroPolicy,
    apply_zero_policy,
    equalized_proportion,
    mh_auxiliaries,
    mnpc_weighted,
)
from .records import MentionSource, PublicationRecord

RNG_ALGORITHM = "numpy.random.PCG64"


@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 1000
    seed: int = 0
    resample_world: bool = False
    ci_level: float = 0.95

    def __post_init__(self) -> None:
        if not isinstance(self.replicates, int) or self.replicates < 100:
            raise InvalidConfigError("replicates must be an integer >= 100")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise InvalidConfigError("seed must be a non-negative integer")
        if not 0.0 < self.ci_level < 1.0:
            raise InvalidConfigError("ci_level must lie strictly between 0 and 1")


def indicator_value(table: StratifiedTable, indicator: Indicator) -> float:
    """Point value of an indicator, skipping interval work."""
    if indicator is Indicator.EMNPC:
        p_g = equalized_proportion(table, "group")
        p_w = equalized_proportion(table, "world")
        if p_w == 0:
            raise ZeroDenominatorError("equalized world proportion is zero")
        return p_g / p_w
    if indicator is Indicator.MNPC:
        return mnpc_weighted(table)
    if indicator is Indicator.MHQ:
        aux = mh_auxiliaries(table)
        if aux.s_total == 0:
            raise ZeroDenominatorError("pooled S term is zero")
        return aux.r_total / aux.s_total
    raise InvalidConfigError(f"cannot bootstrap indicator {indicator!r}")


def _signature_classes(
    records: Sequence[PublicationRecord],
    group_membership: Callable[[PublicationRecord], bool],
    source: MentionSource,
    key_index: dict[StratumKey, int],
    resample_world: bool,
):
    """Group resampling units into exchangeability classes.

    Returns (class sizes, member-assignment matrix, member-mentioned matrix,
    world-assignment matrix, world-mentioned matrix).  The world matrices are
    None when the world is not resampled.  Units without any retained
    category assignment take no part in the tables and are excluded.
    """
    classes: dict[tuple, int] = {}
    for record in records:
        member = group_membership(record)
        if not (member or resample_world):
            continue
        indices = sorted(
            {
                key_index[StratumKey(category, record.year)]
                for category in record.categories
                if StratumKey(category, record.year) in key_index
            }
        )
        if not indices:
            continue
        signature = (tuple(indices), record.is_mentioned(source), member)
        classes[signature] = classes.get(signature, 0) + 1
    ordered = sorted(classes.items())
    sizes = np.array([count for _, count in ordered], dtype=np.int64)
    n_strata = len(key_index)
    member_assign = np.zeros((len(ordered), n_strata))
    member_mention = np.zeros((len(ordered), n_strata))
    world_assign = np.zeros((len(ordered), n_strata)) if resample_world else None
    world_mention = np.zeros((len(ordered), n_strata)) if resample_world else None
    for row, ((indices, mentioned, member), _) in enumerate(ordered):
        for f in indices:
            if member:
                member_assign[row, f] = 1.0
                if mentioned:
                    member_mention[row, f] = 1.0
            if resample_world:
                world_assign[row, f] = 1.0
                if mentioned:
                    world_mention[row, f] = 1.0
    return sizes, member_assign, member_mention, world_assign, world_mention


def bootstrap_replicates(
    records: Sequence[PublicationRecord],
    group_membership: Callable[[PublicationRecord], bool],
    source: MentionSource,
    indicator: Indicator,
    config: BootstrapConfig,
    *,
    zero_policy: ZeroPolicy = ZeroPolicy.CONTINUITY,
    filter_config: FilterConfig | None = None,
    categories: set[str] | None = None,
    world: str = WORLD_INCLUSIVE,
) -> np.ndarray:
    """Indicator values over all replicates; NaN marks incomputable ones."""
    base = build_strata(
        records, group_membership, source, world=world, categories=categories
    )
    filtered = filter_strata(base, filter_config or FilterConfig()).table
    keys = [key for key, _ in filtered.sorted_items()]
    key_index = {key: f for f, key in enumerate(keys)}
    world_s = np.array([filtered.strata[k].s_w for k in keys])
    world_n = np.array([filtered.strata[k].n_w for k in keys])
    sizes, member_assign, member_mention, world_assign, world_mention = (
        _signature_classes(
            records, group_membership, source, key_index, config.resample_world
        )
    )
    total = int(sizes.sum())
    if total == 0 or not member_assign.any():
        raise EmptyGroupError("no group papers left after filtering")
    probabilities = sizes / total
    values = np.full(config.replicates, np.nan)
    for i in range(config.replicates):
        rng = np.random.Generator(np.random.PCG64(config.seed ^ i))
        counts = rng.multinomial(total, probabilities)
        n_g = counts @ member_assign
        s_g = counts @ member_mention
        if config.resample_world:
            n_w = counts @ world_assign
            s_w = counts @ world_mention
        else:
            n_w, s_w = world_n, world_s
        strata = {
            keys[f]: StratumCounts(s_g[f], n_g[f], s_w[f], n_w[f])
            for f in range(len(keys))
            if n_g[f] > 0 and n_w[f] > 0
        }
        if not strata:
            continue
        try:
            table = apply_zero_policy(StratifiedTable(strata), zero_policy)
            values[i] = indicator_value(table, indicator)
        except SparseNormError:
            continue
    return values


def bootstrap_ci(
    records: Sequence[PublicationRecord],
    group_membership: Callable[[PublicationRecord], bool],
    source: MentionSource,
    indicator: Indicator,
    config: BootstrapConfig,
    *,
    zero_policy: ZeroPolicy = ZeroPolicy.CONTINUITY,
    filter_config: FilterConfig | None = None,
    categories: set[str] | None = None,
    world: str = WORLD_INCLUSIVE,
) -> IndicatorEstimate:
    """Percentile bootstrap interval around the full-data indicator value.

    Deterministic: the records, flags, and config fully determine the
    output.  Raises when more than half of the replicates cannot be
    computed.  The percentile bounds are widened to the point value in the
    rare degenerate case where the value falls outside them.
    """
    base = build_strata(
        records, group_membership, source, world=world, categories=categories
    )
    filtered = filter_strata(base, filter_config or FilterConfig()).table
    value = indicator_value(apply_zero_policy(filtered, zero_policy), indicator)
    values = bootstrap_replicates(
        records,
        group_membership,
        source,
        indicator,
        config,
        zero_policy=zero_policy,
        filter_config=filter_config,
        categories=categories,
        world=world,
    )
    valid = values[np.isfinite(values)]
    if len(valid) < math.ceil(len(values) / 2):
        raise DegenerateReplicatesError(
            f"only {len(valid)} of {len(values)} replicates were computable"
        )
    alpha = (1.0 - config.ci_level) / 2.0
    lower, upper = np.percentile(valid, [100 * alpha, 100 * (1 - alpha)])
    return IndicatorEstimate(
        value=value,
        ci_lower=min(float(lower), value),
        ci_upper=max(float(upper), value),
        method=indicator,
        ci_kind=CiKind.BOOTSTRAP,
    )
