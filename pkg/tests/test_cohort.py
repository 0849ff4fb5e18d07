"""Tests for quality grouping, tabulation, and stratum filtering."""

from __future__ import annotations

from collections import defaultdict

import numpy as np
import pytest

from sparsenorm import (
    FilterConfig,
    MentionSource,
    PublicationRecord,
    QualityGroup,
    StratumKey,
    average_recommendation_score,
    build_strata,
    classify_quality_group,
    filter_strata,
    group_membership,
    quality_group,
    recommended_record_ids,
    restrict_to_recommended_categories,
)
from sparsenorm.cohort import (
    RULE_MIN_GROUP_STRATUM_PAPERS,
    RULE_MIN_STRATUM_PAPERS,
    RULE_REQUIRE_MIXED_OUTCOMES,
    WORLD_EXCLUSIVE,
)
from sparsenorm.errors import (
    AllStrataRemovedError,
    DuplicateIdError,
    InvalidConfigError,
    InvalidScoreError,
    NegativeScoreError,
)

from conftest import make_table

CIT = MentionSource.CITATIONS


def record(rid, year=2010, categories=("A",), count=0, scores=()):
    return PublicationRecord(
        id=rid,
        year=year,
        categories=tuple(categories),
        mentions={CIT: count},
        recommendation_scores=tuple(scores),
    )


# --- scores and classification ---------------------------------------------------


def test_average_score_examples():
    assert average_recommendation_score([1, 2, 3]) == 2.0
    assert average_recommendation_score([]) == 0.0
    assert average_recommendation_score([1, 2]) == 1.5


def test_average_score_rejects_out_of_range():
    with pytest.raises(InvalidScoreError):
        average_recommendation_score([1, 4])


def test_classification_bands():
    assert classify_quality_group(0.0) is QualityGroup.Q0
    assert classify_quality_group(1.0) is QualityGroup.Q1
    assert classify_quality_group(1.5) is QualityGroup.Q2


def test_classification_boundary_is_sharp():
    assert classify_quality_group(1.0) is QualityGroup.Q1
    assert classify_quality_group(1.0 + 1e-9) is QualityGroup.Q2


def test_classification_rejects_negative():
    with pytest.raises(NegativeScoreError):
        classify_quality_group(-0.1)


def test_quality_groups_partition_any_dataset():
    rng = np.random.default_rng(5)
    records = []
    for i in range(500):
        n_scores = int(rng.integers(0, 4))
        scores = tuple(int(rng.integers(1, 4)) for _ in range(n_scores))
        records.append(record(f"p{i}", scores=scores))
    sizes = {
        group: sum(1 for r in records if quality_group(r) is group)
        for group in QualityGroup
    }
    assert sum(sizes.values()) == len(records)


# --- tabulation --------------------------------------------------------------------


def test_build_strata_overlapping_full_counting():
    records = [record("p1", categories=("A", "B"), count=2, scores=(1,))]
    table = build_strata(records, group_membership(QualityGroup.Q1), CIT)
    assert table.strata[StratumKey("A", 2010)].as_tuple() == (1, 1, 1, 1)
    assert table.strata[StratumKey("B", 2010)].as_tuple() == (1, 1, 1, 1)


def test_build_strata_non_member_counts_world_only():
    records = [record("p1", count=2)]
    table = build_strata(records, group_membership(QualityGroup.Q1), CIT)
    assert table.strata[StratumKey("A", 2010)].as_tuple() == (0, 0, 1, 1)


def test_build_strata_uncited_group_inside_larger_world():
    records = [record(f"g{i}", count=0, scores=(1,)) for i in range(10)]
    records += [record(f"w{i}", count=1) for i in range(40)]
    records += [record(f"u{i}", count=0) for i in range(50)]
    table = build_strata(records, group_membership(QualityGroup.Q1), CIT)
    assert table.strata[StratumKey("A", 2010)].as_tuple() == (0, 10, 40, 100)


def test_build_strata_rejects_duplicate_ids():
    records = [record("p1"), record("p1")]
    with pytest.raises(DuplicateIdError):
        build_strata(records, lambda r: True, CIT)


def test_build_strata_category_restriction():
    records = [record("p1", categories=("A", "B"), count=1)]
    table = build_strata(records, lambda r: True, CIT, categories={"A"})
    assert set(table.strata) == {StratumKey("A", 2010)}


def test_build_strata_exclusive_world_subtracts_group():
    records = [
        record("g1", count=1, scores=(1,)),
        record("g2", count=0, scores=(1,)),
        record("w1", count=1),
        record("w2", count=0),
        record("w3", count=0),
    ]
    inclusive = build_strata(records, group_membership(QualityGroup.Q1), CIT)
    exclusive = build_strata(
        records, group_membership(QualityGroup.Q1), CIT, world=WORLD_EXCLUSIVE
    )
    assert inclusive.strata[StratumKey("A", 2010)].as_tuple() == (1, 2, 2, 5)
    assert exclusive.strata[StratumKey("A", 2010)].as_tuple() == (1, 2, 1, 3)


def test_build_strata_rejects_unknown_world_mode():
    with pytest.raises(InvalidConfigError):
        build_strata([record("p1")], lambda r: True, CIT, world="galaxy")


def test_build_strata_group_within_world_when_inclusive():
    rng = np.random.default_rng(31)
    records = []
    for i in range(300):
        cats = tuple(
            sorted({f"C{int(rng.integers(0, 4))}" for _ in range(int(rng.integers(1, 3)))})
        )
        records.append(
            record(
                f"p{i}",
                year=2010 + int(rng.integers(0, 3)),
                categories=cats,
                count=int(rng.integers(0, 3)),
                scores=(1,) if rng.random() < 0.3 else (),
            )
        )
    table = build_strata(records, group_membership(QualityGroup.Q1), CIT)
    assert all(c.group_within_world() for c in table.strata.values())


def test_build_strata_matches_naive_recount():
    rng = np.random.default_rng(37)
    records = []
    for i in range(1000):
        cats = tuple(
            sorted({f"C{int(rng.integers(0, 5))}" for _ in range(int(rng.integers(1, 4)))})
        )
        records.append(
            record(
                f"p{i}",
                year=2010 + int(rng.integers(0, 4)),
                categories=cats,
                count=int(rng.integers(0, 4)),
                scores=tuple(
                    int(rng.integers(1, 4)) for _ in range(int(rng.integers(0, 3)))
                ),
            )
        )
    member = group_membership(QualityGroup.Q2)
    table = build_strata(records, member, CIT)

    naive = defaultdict(lambda: [0, 0, 0, 0])
    for r in records:
        for category in r.categories:
            cell = naive[StratumKey(category, r.year)]
            cell[3] += 1
            cell[2] += 1 if r.mentions[CIT] > 0 else 0
            if member(r):
                cell[1] += 1
                cell[0] += 1 if r.mentions[CIT] > 0 else 0
    assert set(table.strata) == set(naive)
    for key, cell in naive.items():
        assert table.strata[key].as_tuple() == tuple(cell)


# --- filtering ---------------------------------------------------------------------


def test_filter_small_world_strata():
    table = make_table({("A", 2010): (1, 2, 4, 9), ("B", 2010): (1, 2, 4, 10)})
    outcome = filter_strata(table, FilterConfig())
    assert set(outcome.table.strata) == {StratumKey("B", 2010)}
    assert outcome.removed == ((StratumKey("A", 2010), RULE_MIN_STRATUM_PAPERS),)


def test_filter_unmixed_world_outcomes():
    table = make_table(
        {
            ("A", 2010): (1, 2, 10, 10),
            ("B", 2010): (1, 2, 0, 10),
            ("C", 2010): (1, 2, 4, 10),
        }
    )
    outcome = filter_strata(table, FilterConfig())
    assert set(outcome.table.strata) == {StratumKey("C", 2010)}
    rules = dict(outcome.removed)
    assert rules[StratumKey("A", 2010)] == RULE_REQUIRE_MIXED_OUTCOMES
    assert rules[StratumKey("B", 2010)] == RULE_REQUIRE_MIXED_OUTCOMES


def test_filter_thin_group_strata():
    table = make_table({("A", 2010): (0, 0, 4, 10), ("B", 2010): (1, 1, 4, 10)})
    outcome = filter_strata(table, FilterConfig())
    assert set(outcome.table.strata) == {StratumKey("B", 2010)}
    assert outcome.removed == (
        (StratumKey("A", 2010), RULE_MIN_GROUP_STRATUM_PAPERS),
    )


def test_filter_is_noop_when_everything_passes():
    table = make_table({("A", 2010): (1, 2, 4, 10)})
    outcome = filter_strata(table, FilterConfig())
    assert outcome.table.strata == table.strata
    assert outcome.removed == ()


def test_filter_raises_when_everything_removed():
    table = make_table({("A", 2010): (1, 2, 4, 9)})
    with pytest.raises(AllStrataRemovedError):
        filter_strata(table, FilterConfig())


def test_filter_empty_table_passes_through():
    from sparsenorm import StratifiedTable

    outcome = filter_strata(StratifiedTable({}), FilterConfig())
    assert len(outcome.table) == 0
    assert outcome.removed == ()


def test_filter_config_validation():
    with pytest.raises(InvalidConfigError):
        FilterConfig(min_stratum_papers=0)


# --- category restriction -----------------------------------------------------------


def test_restrict_to_recommended_categories():
    records = [
        record("p1", categories=("A",), scores=(1,)),
        record("p2", categories=("B",)),
    ]
    allowed = restrict_to_recommended_categories(records, recommended_record_ids(records))
    assert allowed == {"A"}


def test_restrict_with_no_recommendations_is_empty():
    records = [record("p1"), record("p2", categories=("B",))]
    assert restrict_to_recommended_categories(records, set()) == set()


def test_restrict_with_all_categories_recommended_is_noop():
    records = [
        record("p1", categories=("A",), scores=(2,)),
        record("p2", categories=("B",), scores=(1,)),
    ]
    allowed = restrict_to_recommended_categories(records, recommended_record_ids(records))
    assert allowed == {"A", "B"}
