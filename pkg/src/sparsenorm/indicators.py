"""Normalized impact indicators for sparse mention-count data.

Implements three group-level indicators over stratified 2x2 cross tables
(strata are subject-category x publication-year combinations, with the
group's papers counted as part of the world):

* ``emnpc``   ratio of the group's and the world's *equalized* mentioned
  proportions, i.e. unweighted means of per-stratum proportions.
* ``mnpc``    mean over group papers of 0 (unmentioned) or the reciprocal
  world mentioned-proportion of the paper's stratum.
* ``mhq``     Mantel-Haenszel pooled odds ratio of group vs. world, the
  variance of its logarithm estimated with the Robins-Breslow-Greenland
  type formula.

All closed-form confidence intervals are normal approximations on the log
scale with a configurable multiplier ``z`` (1.96 for 95%).  The EMNPC/MNPC
interval formulas follow Bailey's risk-ratio limits; they are known to be
rough approximations and can differ from bootstrap intervals (see the
``bootstrap`` module).

All functions are pure: they never mutate their inputs, and stratum sums
are accumulated in sorted key order so reordering strata cannot change any
output bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import (
    ContinuityAlreadyAppliedError,
    EmptyGroupError,
    EmptyTableError,
    InvalidConfigError,
    InvalidCountsError,
    MissingStratumError,
    NegativeCountError,
    ZeroDenominatorError,
    ZeroProportionError,
    ZeroStratumSizeError,
    ZeroWorldProportionError,
)

DEFAULT_Z = 1.96

GROUP = "group"
WORLD = "world"


class Indicator(str, Enum):
    EMNPC = "EMNPC"
    MNPC = "MNPC"
    MHQ = "MHq"
    PROPORTION = "PROPORTION"


class CiKind(str, Enum):
    CLOSED_FORM = "closed_form"
    BOOTSTRAP = "bootstrap"
    NONE = "none"


class ZeroPolicy(str, Enum):
    """How to make a table safe when a stratum proportion is 0 or 1."""

    CONTINUITY = "continuity"
    DROP_STRATUM = "drop_stratum"
    ERROR = "error"


@dataclass(frozen=True, order=True)
class StratumKey:
    """One subject-category x publication-year combination."""

    category: str
    year: int

    def __post_init__(self) -> None:
        if not self.category:
            raise InvalidConfigError("stratum category label must be non-empty")


@dataclass(frozen=True)
class StratumCounts:
    """Cells of one stratum's 2x2 cross table.

    ``s_g``/``s_w`` count papers mentioned at least once, ``n_g``/``n_w``
    total papers, for the group and the world.  Counts are reals so that the
    continuity correction (half-integers) and expected-count computations
    stay exact; raw tabulation always produces integers.
    """

    s_g: float
    n_g: float
    s_w: float
    n_w: float

    def __post_init__(self) -> None:
        for name in ("s_g", "n_g", "s_w", "n_w"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise InvalidCountsError(f"{name}={v!r} must be finite and >= 0")
        if self.s_g > self.n_g or self.s_w > self.n_w:
            raise InvalidCountsError(
                f"mentioned counts exceed totals: {self.as_tuple()}"
            )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.s_g, self.n_g, self.s_w, self.n_w)

    def group_within_world(self) -> bool:
        """True when the group cells sit inside the world cells.

        Holds by construction for inclusive-world tabulation; an
        exclusive-world table violates it on purpose.
        """
        return self.s_g <= self.s_w and self.n_g <= self.n_w


@dataclass(frozen=True)
class StratifiedTable:
    """All strata for one group-vs-world comparison."""

    strata: Mapping[StratumKey, StratumCounts]
    continuity_applied: bool = False

    def __post_init__(self) -> None:
        # defensive copy so later mutation of the source mapping cannot leak in
        object.__setattr__(self, "strata", dict(self.strata))

    def __len__(self) -> int:
        return len(self.strata)

    def sorted_items(self) -> list[tuple[StratumKey, StratumCounts]]:
        return sorted(self.strata.items())


@dataclass(frozen=True)
class IndicatorEstimate:
    """Point value with confidence bounds and provenance tags."""

    value: float
    ci_lower: float
    ci_upper: float
    method: Indicator
    ci_kind: CiKind

    def __post_init__(self) -> None:
        for name in ("value", "ci_lower", "ci_upper"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise InvalidCountsError(f"{name}={v!r} must be finite and >= 0")
        if self.ci_kind is not CiKind.NONE:
            if not (self.ci_lower <= self.value <= self.ci_upper):
                raise InvalidCountsError(
                    f"interval [{self.ci_lower}, {self.ci_upper}] does not "
                    f"contain the value {self.value}"
                )

    @classmethod
    def point(cls, value: float, method: Indicator) -> "IndicatorEstimate":
        return cls(value, value, value, method, CiKind.NONE)

    def overlaps(self, other: "IndicatorEstimate") -> bool:
        return self.ci_lower <= other.ci_upper and other.ci_lower <= self.ci_upper


@dataclass(frozen=True)
class PaperScore:
    """Per-paper normalized score: 0 if unmentioned, else the reciprocal
    world mentioned-proportion of the paper's stratum."""

    mention_count: int
    stratum: StratumKey
    r: float

    def __post_init__(self) -> None:
        if self.mention_count < 0:
            raise NegativeCountError("mention_count must be >= 0")
        if (self.r == 0) != (self.mention_count == 0):
            raise InvalidCountsError(
                "r must be zero exactly for unmentioned papers"
            )


@dataclass(frozen=True)
class MhStratumTerms:
    """Per-stratum auxiliary quantities of the Mantel-Haenszel pooling."""

    r: float
    s: float
    p: float
    q: float


@dataclass(frozen=True)
class MhAuxiliaries:
    r_total: float
    s_total: float
    per_stratum: Mapping[StratumKey, MhStratumTerms] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_stratum", dict(self.per_stratum))


def _require_strata(table: StratifiedTable) -> list[tuple[StratumKey, StratumCounts]]:
    items = table.sorted_items()
    if not items:
        raise EmptyTableError("the stratified table has no strata")
    return items


def _cells(counts: StratumCounts, side: str) -> tuple[float, float]:
    if side == GROUP:
        return counts.s_g, counts.n_g
    if side == WORLD:
        return counts.s_w, counts.n_w
    raise InvalidConfigError(f"side must be 'group' or 'world', got {side!r}")


def proportion_mentioned(table: StratifiedTable, side: str) -> float:
    """Overall mentioned proportion for one side: sum(s_f) / sum(n_f)."""
    items = _require_strata(table)
    mentioned = total = 0.0
    for _, counts in items:
        s, n = _cells(counts, side)
        mentioned += s
        total += n
    if total == 0:
        raise ZeroDenominatorError(f"no {side} papers in any stratum")
    return mentioned / total


def equalized_proportion(table: StratifiedTable, side: str) -> float:
    """Unweighted mean of per-stratum mentioned proportions for one side."""
    items = _require_strata(table)
    acc = 0.0
    for key, counts in items:
        s, n = _cells(counts, side)
        if n == 0:
            raise ZeroStratumSizeError(
                f"stratum {key} has no {side} papers; exclude it first"
            )
        acc += s / n
    return acc / len(items)


def _log_scale_interval(value: float, variance: float, z: float) -> tuple[float, float]:
    half = z * math.sqrt(variance)
    log_v = math.log(value)
    return math.exp(log_v - half), math.exp(log_v + half)


def emnpc(table: StratifiedTable, z: float = DEFAULT_Z) -> IndicatorEstimate:
    """Equalized mean-based normalized proportion cited, with its CI.

    The variance term per side is (1 - p) / (p * n) with n the side's total
    paper count; this is the algebraic simplification of Bailey's printed
    risk-ratio formula.  The resulting interval is a rough approximation
    because the equalized proportions are unweighted stratum means while n
    is a pooled total.
    """
    p_g = equalized_proportion(table, GROUP)
    p_w = equalized_proportion(table, WORLD)
    if p_w == 0:
        raise ZeroWorldProportionError(
            "equalized world proportion is zero; apply a zero policy first"
        )
    if p_g == 0:
        return IndicatorEstimate.point(0.0, Indicator.EMNPC)
    n_g = sum(c.n_g for _, c in table.sorted_items())
    n_w = sum(c.n_w for _, c in table.sorted_items())
    value = p_g / p_w
    variance = (1 - p_g) / (p_g * n_g) + (1 - p_w) / (p_w * n_w)
    lower, upper = _log_scale_interval(value, variance, z)
    return IndicatorEstimate(value, lower, upper, Indicator.EMNPC, CiKind.CLOSED_FORM)


def world_proportions(table: StratifiedTable) -> dict[StratumKey, float]:
    """Per-stratum world mentioned proportions, keyed by stratum."""
    out: dict[StratumKey, float] = {}
    for key, counts in _require_strata(table):
        if counts.n_w == 0:
            raise ZeroStratumSizeError(f"stratum {key} has no world papers")
        out[key] = counts.s_w / counts.n_w
    return out


def mnpc_scores(
    papers: Iterable[tuple[int, StratumKey]],
    world_proportions: Mapping[StratumKey, float],
) -> list[PaperScore]:
    """Score papers: 0 if unmentioned, else 1 / world proportion of the
    paper's stratum.  Mention magnitude beyond mentioned/unmentioned is
    deliberately discarded."""
    scores: list[PaperScore] = []
    for mention_count, stratum in papers:
        if stratum not in world_proportions:
            raise MissingStratumError(f"no world proportion for stratum {stratum}")
        p_w = world_proportions[stratum]
        if p_w <= 0:
            raise ZeroWorldProportionError(
                f"stratum {stratum} has zero world proportion; "
                "apply a zero policy first"
            )
        r = 0.0 if mention_count == 0 else 1.0 / p_w
        scores.append(PaperScore(mention_count, stratum, r))
    return scores


def mnpc(papers: Sequence[PaperScore]) -> IndicatorEstimate:
    """Mean-based normalized proportion cited: plain mean of paper scores.

    Point value only; see :func:`mnpc_ci` for the interval.
    """
    if not papers:
        raise EmptyGroupError("cannot average scores of an empty group")
    value = sum(p.r for p in papers) / len(papers)
    return IndicatorEstimate.point(value, Indicator.MNPC)


def mnpc_weighted(table: StratifiedTable) -> float:
    """Stratum-weighted form of the MNPC: sum_f (n_gf/n_g) * (p_gf/p_wf).

    Equal (up to rounding) to the per-paper mean of :func:`mnpc_scores`
    outputs over the same data.
    """
    items = _require_strata(table)
    n_g = sum(c.n_g for _, c in items)
    if n_g == 0:
        raise EmptyGroupError("the group has no papers in any stratum")
    acc = 0.0
    for key, counts in items:
        if counts.n_g == 0:
            continue
        if counts.n_w == 0:
            raise ZeroStratumSizeError(f"stratum {key} has no world papers")
        p_w = counts.s_w / counts.n_w
        if p_w == 0:
            raise ZeroWorldProportionError(
                f"stratum {key} has zero world proportion; "
                "apply a zero policy first"
            )
        p_g = counts.s_g / counts.n_g
        acc += (counts.n_g / n_g) * (p_g / p_w)
    return acc


def mnpc_stratum_ci(
    stratum: StratumCounts, z: float = DEFAULT_Z
) -> tuple[float, float]:
    """Bailey limits for one stratum's proportion ratio p_g / p_w."""
    if stratum.n_g == 0 or stratum.n_w == 0:
        raise ZeroStratumSizeError("stratum has an empty side")
    p_g = stratum.s_g / stratum.n_g
    p_w = stratum.s_w / stratum.n_w
    if p_g == 0 or p_w == 0:
        raise ZeroProportionError(
            "a zero proportion admits no ratio interval; apply a zero policy first"
        )
    value = p_g / p_w
    variance = (1 - p_g) / (p_g * stratum.n_g) + (1 - p_w) / (p_w * stratum.n_w)
    return _log_scale_interval(value, variance, z)


def combine_stratum_intervals(
    value: float,
    parts: Iterable[tuple[float, float, float, float]],
) -> tuple[float, float]:
    """Combine per-stratum ratio intervals into MNPC limits.

    ``parts`` yields (weight, ratio, lower, upper) per stratum, with weights
    n_gf / n_g.  The lower limit subtracts the weighted below-ratio spans
    from the value, the upper limit adds the weighted above-ratio spans.
    A microscopic negative lower bound from float cancellation is clamped
    to zero.
    """
    below = above = 0.0
    for weight, ratio, lower, upper in parts:
        below += weight * (ratio - lower)
        above += weight * (upper - ratio)
    return max(0.0, value - below), value + above


def mnpc_ci(
    table: StratifiedTable,
    value: float | None = None,
    z: float = DEFAULT_Z,
) -> IndicatorEstimate:
    """MNPC estimate with its two-stage interval.

    Per-stratum Bailey limits are combined with weights n_gf / n_g.  When
    ``value`` is omitted it is computed via :func:`mnpc_weighted`, which
    matches the per-paper mean.
    """
    items = _require_strata(table)
    n_g = sum(c.n_g for _, c in items)
    if n_g == 0:
        raise EmptyGroupError("the group has no papers in any stratum")
    if value is None:
        value = mnpc_weighted(table)
    parts = []
    for key, counts in items:
        if counts.n_g == 0:
            continue
        lower, upper = mnpc_stratum_ci(counts, z)
        ratio = (counts.s_g / counts.n_g) / (counts.s_w / counts.n_w)
        parts.append((counts.n_g / n_g, ratio, lower, upper))
    ci_lower, ci_upper = combine_stratum_intervals(value, parts)
    return IndicatorEstimate(value, ci_lower, ci_upper, Indicator.MNPC, CiKind.CLOSED_FORM)


def mh_auxiliaries(table: StratifiedTable) -> MhAuxiliaries:
    """Per-stratum R, S, P, Q terms and the pooled R and S sums."""
    per_stratum: dict[StratumKey, MhStratumTerms] = {}
    r_total = s_total = 0.0
    for key, c in _require_strata(table):
        denom = c.n_w + c.n_g
        if denom == 0:
            raise ZeroStratumSizeError(f"stratum {key} has no papers at all")
        r = c.s_g * (c.n_w - c.s_w) / denom
        s = (c.n_g - c.s_g) * c.s_w / denom
        p = (c.s_g + c.n_w - c.s_w) / denom
        per_stratum[key] = MhStratumTerms(r=r, s=s, p=p, q=1 - p)
        r_total += r
        s_total += s
    return MhAuxiliaries(r_total, s_total, per_stratum)


def mhq(table: StratifiedTable, z: float = DEFAULT_Z) -> IndicatorEstimate:
    """Mantel-Haenszel quotient: pooled odds ratio of group vs. world.

    The variance of ln(MHq) is the half-sum of the P/Q-weighted R and S
    terms; the interval is symmetric about the value on the log scale.
    A zero pooled R yields value 0 with no interval; a zero pooled S is an
    error unless a zero policy corrected the table first.
    """
    aux = mh_auxiliaries(table)
    if aux.s_total == 0:
        raise ZeroDenominatorError(
            "pooled S term is zero (no unmentioned group papers paired with "
            "mentioned world papers); apply a zero policy first"
        )
    value = aux.r_total / aux.s_total
    if aux.r_total == 0:
        return IndicatorEstimate.point(0.0, Indicator.MHQ)
    sum_pr = sum_mixed = sum_qs = 0.0
    for key in sorted(aux.per_stratum):
        t = aux.per_stratum[key]
        sum_pr += t.p * t.r
        sum_mixed += t.p * t.s + t.q * t.r
        sum_qs += t.q * t.s
    r, s = aux.r_total, aux.s_total
    variance = 0.5 * (sum_pr / r**2 + sum_mixed / (r * s) + sum_qs / s**2)
    lower, upper = _log_scale_interval(value, variance, z)
    return IndicatorEstimate(value, lower, upper, Indicator.MHQ, CiKind.CLOSED_FORM)


# --- zero-proportion policy ----------------------------------------------------


def apply_continuity_correction(table: StratifiedTable) -> StratifiedTable:
    """Add 0.5 to the mentioned and unmentioned cells of every row.

    Every stratum gains 0.5 on s and 1 on n, for the group and the world,
    which pulls every proportion strictly inside (0, 1).  Applying the
    correction twice is rejected.
    """
    if table.continuity_applied:
        raise ContinuityAlreadyAppliedError(
            "continuity correction was already applied to this table"
        )
    corrected = {
        key: StratumCounts(c.s_g + 0.5, c.n_g + 1.0, c.s_w + 0.5, c.n_w + 1.0)
        for key, c in table.strata.items()
    }
    return StratifiedTable(corrected, continuity_applied=True)


def _is_extreme(c: StratumCounts) -> bool:
    return c.s_g in (0, c.n_g) or c.s_w in (0, c.n_w)


def needs_zero_correction(table: StratifiedTable) -> bool:
    """True when any stratum has a proportion of exactly 0 or 1 on either side."""
    return any(_is_extreme(c) for c in table.strata.values())


def apply_zero_policy(table: StratifiedTable, policy: ZeroPolicy) -> StratifiedTable:
    """Make a table safe for ratio and odds computations.

    ``CONTINUITY`` applies the 0.5 correction to *all* strata, but only when
    some stratum actually has an extreme proportion, so unaffected tables
    pass through bit-identical.  ``DROP_STRATUM`` removes offending strata.
    ``ERROR`` passes the table through; downstream operations raise their
    specific errors when they hit a zero.
    """
    if policy is ZeroPolicy.ERROR:
        return table
    if not needs_zero_correction(table):
        return table
    if policy is ZeroPolicy.CONTINUITY:
        return apply_continuity_correction(table)
    if policy is ZeroPolicy.DROP_STRATUM:
        kept = {k: c for k, c in table.strata.items() if not _is_extreme(c)}
        if not kept:
            raise EmptyTableError(
                "the zero policy dropped every stratum; nothing left to compute"
            )
        return StratifiedTable(kept, continuity_applied=table.continuity_applied)
    raise InvalidConfigError(f"unknown zero policy {policy!r}")


def compute_indicator(
    table: StratifiedTable, indicator: Indicator, z: float = DEFAULT_Z
) -> IndicatorEstimate:
    """Dispatch to the requested indicator with its closed-form interval."""
    if indicator is Indicator.EMNPC:
        return emnpc(table, z)
    if indicator is Indicator.MNPC:
        return mnpc_ci(table, z=z)
    if indicator is Indicator.MHQ:
        return mhq(table, z)
    raise InvalidConfigError(f"cannot compute indicator {indicator!r} from a table")
