"""Shared test helpers."""

from __future__ import annotations

import numpy as np

from sparsenorm import StratifiedTable, StratumCounts, StratumKey


def make_table(cells, continuity_applied: bool = False) -> StratifiedTable:
    """Build a table from {(category, year): (s_g, n_g, s_w, n_w)}."""
    strata = {
        StratumKey(category, year): StratumCounts(*counts)
        for (category, year), counts in cells.items()
    }
    return StratifiedTable(strata, continuity_applied=continuity_applied)


def random_counts(rng: np.random.Generator, max_side: int = 60) -> StratumCounts:
    """Random inclusive-world stratum with every 2x2 cell at least 1."""
    n_g = int(rng.integers(2, max_side))
    s_g = int(rng.integers(1, n_g))
    extra_mentioned = int(rng.integers(0, max_side))
    extra_unmentioned = int(rng.integers(1, max_side))
    s_w = s_g + extra_mentioned
    n_w = n_g + extra_mentioned + extra_unmentioned
    return StratumCounts(s_g, n_g, s_w, n_w)


def random_table(
    rng: np.random.Generator, max_strata: int = 6, max_side: int = 60
) -> StratifiedTable:
    n = int(rng.integers(1, max_strata + 1))
    return StratifiedTable(
        {
            StratumKey(f"C{i}", 2010 + int(rng.integers(0, 4))): random_counts(
                rng, max_side
            )
            for i in range(n)
        }
    )


def classical_odds_ratio(c: StratumCounts) -> float:
    """Independently coded single-table odds ratio of the group vs world rows."""
    return (c.s_g * (c.n_w - c.s_w)) / ((c.n_g - c.s_g) * c.s_w)
