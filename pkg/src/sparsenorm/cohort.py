"""Quality groups and stratified tabulation of publication records.

Papers are partitioned into three quality tiers from their average peer
recommendation score, tabulated into category-by-year strata with full
(overlapping) counting, and filtered by the inclusion rules the indicators
assume: big enough world strata, mixed world outcomes, and a minimum group
presence per stratum.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

from .errors import (
    AllStrataRemovedError,
    DuplicateIdError,
    InvalidConfigError,
    InvalidScoreError,
    NegativeScoreError,
)
from .indicators import StratifiedTable, StratumCounts, StratumKey
from .records import VALID_SCORES, MentionSource, PublicationRecord

WORLD_INCLUSIVE = "inclusive"
WORLD_EXCLUSIVE = "exclusive"

RULE_MIN_STRATUM_PAPERS = "min_stratum_papers"
RULE_REQUIRE_MIXED_OUTCOMES = "require_mixed_outcomes"
RULE_MIN_GROUP_STRATUM_PAPERS = "min_group_stratum_papers"


class QualityGroup(str, Enum):
    Q0 = "Q0"
    Q1 = "Q1"
    Q2 = "Q2"


def average_recommendation_score(scores: Iterable[int]) -> float:
    """Arithmetic mean of the recommendation scores; 0.0 when there are none."""
    scores = list(scores)
    for score in scores:
        if score not in VALID_SCORES:
            raise InvalidScoreError(
                f"score {score!r} outside the allowed set {VALID_SCORES}"
            )
    if not scores:
        return 0.0
    return sum(scores) / len(scores)


def classify_quality_group(ffa: float) -> QualityGroup:
    """Map an average score to its tier: 0 -> Q0, (0, 1] -> Q1, above -> Q2."""
    if ffa < 0:
        raise NegativeScoreError(f"average score must be >= 0, got {ffa!r}")
    if ffa == 0:
        return QualityGroup.Q0
    if ffa <= 1.0:
        return QualityGroup.Q1
    return QualityGroup.Q2


def quality_group(record: PublicationRecord) -> QualityGroup:
    return classify_quality_group(
        average_recommendation_score(record.recommendation_scores)
    )


def group_membership(group: QualityGroup) -> Callable[[PublicationRecord], bool]:
    return lambda record: quality_group(record) is group


@dataclass(frozen=True)
class FilterConfig:
    """Stratum inclusion rules.

    ``min_stratum_papers`` keeps strata with at least that many world papers
    (the default 10 means "more than 9").  ``require_mixed_outcomes`` drops
    strata whose world papers are all mentioned or all unmentioned.
    ``min_group_stratum_papers`` drops strata where the group is too thin;
    raising it (10 is a reasonable choice) stabilizes the EMNPC, whose
    equalized mean weights every stratum equally.
    """

    min_stratum_papers: int = 10
    require_mixed_outcomes: bool = True
    min_group_stratum_papers: int = 1
    restrict_to_recommended_categories: bool = True

    def __post_init__(self) -> None:
        if self.min_stratum_papers < 1:
            raise InvalidConfigError("min_stratum_papers must be >= 1")
        if self.min_group_stratum_papers < 0:
            raise InvalidConfigError("min_group_stratum_papers must be >= 0")


@dataclass(frozen=True)
class FilterOutcome:
    table: StratifiedTable
    removed: tuple[tuple[StratumKey, str], ...]


def build_strata(
    records: Sequence[PublicationRecord],
    group_membership: Callable[[PublicationRecord], bool],
    source: MentionSource,
    *,
    world: str = WORLD_INCLUSIVE,
    categories: set[str] | None = None,
) -> StratifiedTable:
    """Tabulate records into category-by-year 2x2 strata.

    A paper with k categories contributes a full count of 1 to each of its
    k strata (overlapping full counting), on the world side and, if it
    satisfies ``group_membership``, on the group side.  A paper is mentioned
    in a stratum iff its count for ``source`` is positive.  ``categories``,
    when given, restricts which category assignments are tabulated at all.
    With ``world="exclusive"`` the world cells exclude the group's papers.
    """
    if world not in (WORLD_INCLUSIVE, WORLD_EXCLUSIVE):
        raise InvalidConfigError(f"world must be inclusive or exclusive, got {world!r}")
    seen: set[str] = set()
    cells: dict[StratumKey, list[int]] = defaultdict(lambda: [0, 0, 0, 0])
    for record in records:
        if record.id in seen:
            raise DuplicateIdError(f"duplicate publication id {record.id!r}")
        seen.add(record.id)
        mentioned = record.is_mentioned(source)
        member = group_membership(record)
        for category in record.categories:
            if categories is not None and category not in categories:
                continue
            cell = cells[StratumKey(category, record.year)]
            cell[3] += 1
            cell[2] += mentioned
            if member:
                cell[1] += 1
                cell[0] += mentioned
    strata = {}
    for key, (s_g, n_g, s_w, n_w) in cells.items():
        if world == WORLD_EXCLUSIVE:
            s_w -= s_g
            n_w -= n_g
        strata[key] = StratumCounts(s_g, n_g, s_w, n_w)
    return StratifiedTable(strata)


def filter_strata(table: StratifiedTable, config: FilterConfig) -> FilterOutcome:
    """Apply the inclusion rules, reporting each removal with its rule name.

    Rules are checked in a fixed order per stratum and the first violated
    rule is reported.  Raises when a non-empty table loses every stratum.
    """
    kept: dict[StratumKey, StratumCounts] = {}
    removed: list[tuple[StratumKey, str]] = []
    for key, counts in table.sorted_items():
        if counts.n_w < config.min_stratum_papers:
            removed.append((key, RULE_MIN_STRATUM_PAPERS))
        elif config.require_mixed_outcomes and counts.s_w in (0, counts.n_w):
            removed.append((key, RULE_REQUIRE_MIXED_OUTCOMES))
        elif counts.n_g < config.min_group_stratum_papers:
            removed.append((key, RULE_MIN_GROUP_STRATUM_PAPERS))
        else:
            kept[key] = counts
    if removed and not kept:
        raise AllStrataRemovedError(
            "every stratum was removed: "
            + ", ".join(f"{k.category}/{k.year} ({rule})" for k, rule in removed)
        )
    return FilterOutcome(
        StratifiedTable(kept, continuity_applied=table.continuity_applied),
        tuple(removed),
    )


def recommended_record_ids(records: Iterable[PublicationRecord]) -> set[str]:
    """Ids of records carrying at least one recommendation score."""
    return {r.id for r in records if r.recommendation_scores}


def restrict_to_recommended_categories(
    records: Iterable[PublicationRecord],
    recommended_record_ids: set[str],
) -> set[str]:
    """Categories that appear on at least one recommended record.

    Tabulation then ignores category assignments outside this set, so
    strata never touched by a recommendation do not dilute the comparison.
    """
    allowed: set[str] = set()
    for record in records:
        if record.id in recommended_record_ids:
            allowed.update(record.categories)
    return allowed
