"""Synthetic zero-inflated publication datasets with planted quality tiers.

The generator draws, for every configured stratum, three blocks of papers
(quality tiers Q0/Q1/Q2) plus an unrecommended remainder filling the world
up to the configured stratum size.  Each paper gets a Bernoulli mentioned
indicator per source; the indicators downstream only consume mentioned vs.
unmentioned, so richer count distributions would add nothing.  Tier
membership is realized through recommendation scores (Q0 none, Q1 a single
1, Q2 a single 2), which the cohort classification maps back to the tiers.

Everything is deterministic: stratum i draws from a PCG64 stream seeded
with ``seed XOR i``, so strata could be generated in parallel without
changing a single byte of output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .cohort import QualityGroup
from .errors import InvalidConfigError, ZeroDenominatorError
from .indicators import StratumKey
from .ingest import (
    DatasetManifest,
    write_manifest,
    write_mentions,
    write_publications,
    write_recommendations,
)
from .records import MentionSource, PublicationRecord

RNG_ALGORITHM = "numpy.random.PCG64"

TIER_ORDER = (QualityGroup.Q0, QualityGroup.Q1, QualityGroup.Q2)
TIER_SCORES: dict[QualityGroup, tuple[int, ...]] = {
    QualityGroup.Q0: (),
    QualityGroup.Q1: (1,),
    QualityGroup.Q2: (2,),
}


@dataclass(frozen=True)
class TierSpec:
    """Size and per-source mentioned probabilities of one tier in one stratum."""

    size: int
    mention_probabilities: Mapping[MentionSource, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.size, int) or self.size < 0:
            raise InvalidConfigError(f"tier size must be a non-negative int: {self.size!r}")
        probs = dict(self.mention_probabilities)
        for source, pi in probs.items():
            if not isinstance(source, MentionSource):
                raise InvalidConfigError(f"unknown mention source {source!r}")
            if not 0.0 <= pi <= 1.0:
                raise InvalidConfigError(f"probability {pi!r} for {source} not in [0, 1]")
        object.__setattr__(self, "mention_probabilities", probs)

    def probability(self, source: MentionSource) -> float:
        return self.mention_probabilities.get(source, 0.0)


@dataclass(frozen=True)
class StratumSpec:
    key: StratumKey
    world_size: int
    tiers: Mapping[QualityGroup, TierSpec] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.world_size, int) or self.world_size < 0:
            raise InvalidConfigError(f"world_size must be a non-negative int: {self.world_size!r}")
        tiers = dict(self.tiers)
        if sum(t.size for t in tiers.values()) > self.world_size:
            raise InvalidConfigError(
                f"stratum {self.key}: tier sizes exceed world_size {self.world_size}"
            )
        object.__setattr__(self, "tiers", tiers)

    def remainder(self) -> int:
        """World papers beyond the explicit tiers; generated as unrecommended
        background drawing with the Q0 probabilities."""
        return self.world_size - sum(t.size for t in self.tiers.values())

    def effective_size(self, tier: QualityGroup) -> int:
        size = self.tiers[tier].size if tier in self.tiers else 0
        if tier is QualityGroup.Q0:
            size += self.remainder()
        return size


@dataclass(frozen=True)
class SynthConfig:
    strata: tuple[StratumSpec, ...]
    seed: int
    multi_category_share: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.seed, int) or self.seed < 0:
            raise InvalidConfigError("seed must be a non-negative integer")
        if not 0.0 <= self.multi_category_share <= 1.0:
            raise InvalidConfigError("multi_category_share must be in [0, 1]")
        object.__setattr__(self, "strata", tuple(self.strata))
        keys = [spec.key for spec in self.strata]
        if len(set(keys)) != len(keys):
            raise InvalidConfigError("duplicate stratum keys in config")

    def sources(self) -> list[MentionSource]:
        declared: set[MentionSource] = set()
        for spec in self.strata:
            for tier in spec.tiers.values():
                declared.update(tier.mention_probabilities)
        return sorted(declared, key=lambda s: s.value)

    @classmethod
    def from_dict(cls, raw: Mapping) -> "SynthConfig":
        try:
            strata = []
            for entry in raw["strata"]:
                tiers = {}
                for tier_name, tier_raw in entry.get("tiers", {}).items():
                    probabilities = {
                        MentionSource.from_label(label): float(pi)
                        for label, pi in tier_raw.get("pi", {}).items()
                    }
                    tiers[QualityGroup(tier_name)] = TierSpec(
                        size=int(tier_raw["size"]),
                        mention_probabilities=probabilities,
                    )
                strata.append(
                    StratumSpec(
                        key=StratumKey(str(entry["category"]), int(entry["year"])),
                        world_size=int(entry["world_size"]),
                        tiers=tiers,
                    )
                )
            return cls(
                strata=tuple(strata),
                seed=int(raw["seed"]),
                multi_category_share=float(raw.get("multi_category_share", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfigError(f"bad generator config: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "multi_category_share": self.multi_category_share,
            "strata": [
                {
                    "category": spec.key.category,
                    "year": spec.key.year,
                    "world_size": spec.world_size,
                    "tiers": {
                        tier.value: {
                            "size": spec.tiers[tier].size,
                            "pi": {
                                source.value: pi
                                for source, pi in sorted(
                                    spec.tiers[tier].mention_probabilities.items(),
                                    key=lambda kv: kv[0].value,
                                )
                            },
                        }
                        for tier in TIER_ORDER
                        if tier in spec.tiers
                    },
                }
                for spec in self.strata
            ],
        }


def load_config(path: str | Path) -> SynthConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConfigError(f"cannot read generator config {path}: {exc}") from exc
    return SynthConfig.from_dict(raw)


def _next_category_same_year(
    strata: Sequence[StratumSpec], index: int
) -> str | None:
    year = strata[index].key.year
    n = len(strata)
    for offset in range(1, n):
        other = strata[(index + offset) % n]
        if other.key.year == year and other.key.category != strata[index].key.category:
            return other.key.category
    return None


def generate(config: SynthConfig) -> list[PublicationRecord]:
    """Draw the synthetic papers described by the config, deterministically."""
    sources = config.sources()
    records: list[PublicationRecord] = []
    for index, spec in enumerate(config.strata):
        rng = np.random.Generator(np.random.PCG64(config.seed ^ index))
        category, year = spec.key.category, spec.key.year
        extra_category = (
            _next_category_same_year(config.strata, index)
            if config.multi_category_share > 0
            else None
        )
        serial = 0
        for tier in TIER_ORDER:
            block = spec.effective_size(tier)
            if block == 0:
                continue
            tier_spec = spec.tiers.get(tier, TierSpec(size=0))
            mentioned = {
                source: rng.random(block) < tier_spec.probability(source)
                for source in sources
            }
            if extra_category is not None:
                doubled = rng.random(block) < config.multi_category_share
            scores = TIER_SCORES[tier]
            for j in range(block):
                categories = (category,)
                if extra_category is not None and doubled[j]:
                    categories = (category, extra_category)
                records.append(
                    PublicationRecord(
                        id=f"{category}-{year}-{serial:06d}",
                        year=year,
                        categories=categories,
                        mentions={
                            source: int(mentioned[source][j]) for source in sources
                        },
                        recommendation_scores=scores,
                    )
                )
                serial += 1
    return records


def expected_mhq(
    config: SynthConfig, tier: QualityGroup, source: MentionSource
) -> float:
    """Population Mantel-Haenszel quotient of a tier against the inclusive
    world, from expected cell counts (size times probability) per stratum.

    Only defined for single-category configs; overlapping categories change
    the stratum composition in ways this closed form does not model.
    """
    if config.multi_category_share > 0:
        raise InvalidConfigError(
            "expected_mhq requires a single-category config "
            "(multi_category_share == 0)"
        )
    r_total = s_total = 0.0
    for spec in config.strata:
        n_w = float(spec.world_size)
        s_w = 0.0
        for t in TIER_ORDER:
            pi = spec.tiers[t].probability(source) if t in spec.tiers else 0.0
            s_w += spec.effective_size(t) * pi
        n_g = float(spec.effective_size(tier))
        if n_g == 0 or n_w == 0:
            continue
        pi_tier = spec.tiers[tier].probability(source) if tier in spec.tiers else 0.0
        s_g = n_g * pi_tier
        denom = n_w + n_g
        r_total += s_g * (n_w - s_w) / denom
        s_total += (n_g - s_g) * s_w / denom
    if s_total == 0:
        raise ZeroDenominatorError(
            "expected pooled S term is zero; the tier or world is degenerate"
        )
    return r_total / s_total


def write_dataset(config: SynthConfig, out_dir: str | Path) -> Path:
    """Generate and write a dataset in the canonical file formats.

    Returns the path of the manifest tying the files together, so the
    output feeds straight into the ingest module.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = generate(config)
    years = [spec.key.year for spec in config.strata] or [2010]
    publications = out_dir / "publications.csv"
    recommendations = out_dir / "recommendations.csv"
    write_publications(records, publications)
    write_recommendations(records, recommendations)
    mentions_paths: dict[MentionSource, Path] = {}
    for source in config.sources():
        path = out_dir / f"mentions_{source.value}.csv"
        write_mentions(records, source, path)
        mentions_paths[source] = path
    manifest = DatasetManifest(
        publications_path=publications,
        mentions_paths=mentions_paths,
        recommendations_path=recommendations,
        year_range=(min(years), max(years)),
    )
    manifest_path = out_dir / "manifest.json"
    write_manifest(manifest, manifest_path)
    return manifest_path


# --- reference calibrations -----------------------------------------------------

# Observed large-corpus benchmarks, per publication year: how the papers split
# into quality tiers, and what percentage of each tier was never mentioned,
# for citations and for overall Twitter mentions.  These drive the validation
# experiments that check whether the indicators can separate the tiers.
BENCHMARK_TIER_COUNTS: dict[int, tuple[int, int, int]] = {
    2010: (628_862, 6_576, 4_368),
    2011: (681_749, 6_324, 4_418),
    2012: (733_813, 5_826, 5_042),
    2013: (785_961, 4_176, 6_361),
}

BENCHMARK_UNMENTIONED_PERCENT: dict[MentionSource, dict[int, tuple[float, float, float]]] = {
    MentionSource.CITATIONS: {
        2010: (10.36, 0.84, 0.43),
        2011: (10.61, 1.12, 0.68),
        2012: (10.41, 1.08, 0.46),
        2013: (10.84, 1.39, 0.50),
    },
    MentionSource.TWITTER_ALL: {
        2010: (95.63, 86.50, 76.21),
        2011: (87.99, 69.13, 51.91),
        2012: (72.47, 38.47, 23.59),
        2013: (68.12, 31.29, 21.10),
    },
}

BENCHMARK_YEARS = tuple(sorted(BENCHMARK_TIER_COUNTS))


def benchmark_tier_config(
    year: int,
    *,
    world_size: int = 100_000,
    seed: int = 0,
    category: str = "ALL",
) -> SynthConfig:
    """One-stratum config for a benchmark year, tiers scaled to world_size.

    Mention probabilities are 1 minus the benchmark unmentioned share, per
    tier, for both calibrated sources.
    """
    if year not in BENCHMARK_TIER_COUNTS:
        raise InvalidConfigError(f"no benchmark calibration for year {year}")
    counts = BENCHMARK_TIER_COUNTS[year]
    total = sum(counts)
    q1 = round(world_size * counts[1] / total)
    q2 = round(world_size * counts[2] / total)
    q0 = world_size - q1 - q2
    sizes = (q0, q1, q2)
    tiers = {}
    for i, tier in enumerate(TIER_ORDER):
        probabilities = {
            source: 1.0 - by_year[year][i] / 100.0
            for source, by_year in BENCHMARK_UNMENTIONED_PERCENT.items()
        }
        tiers[tier] = TierSpec(size=sizes[i], mention_probabilities=probabilities)
    spec = StratumSpec(
        key=StratumKey(category, year), world_size=world_size, tiers=tiers
    )
    return SynthConfig(strata=(spec,), seed=seed)


def discrimination_contrast_config(seed: int = 0) -> SynthConfig:
    """Heterogeneous-strata scenario where the pooled odds ratio separates
    the planted tiers but the proportion-based indicators cannot.

    World mentioned proportions span roughly [0.05, 0.9].  Tier Q2 carries a
    strong odds advantage concentrated in the low-proportion stratum; tier
    Q1 a mild one concentrated where proportions saturate, so the equalized
    and mean-based proportion ratios of the two tiers nearly coincide while
    their pooled odds ratios differ several-fold.
    """
    source = MentionSource.CITATIONS
    # (category, baseline probability, background size,
    #  Q0 size, Q1 size, pi_Q1, Q2 size, pi_Q2)
    # Baselines are tuned so the realized world proportions run from about
    # 0.05 (LOW, where the tiers push the mix upward) to about 0.9 (HIGH).
    rows = [
        ("LOW", 0.0315, 40_000, 500, 200, 0.30, 1_800, 0.45),
        ("MID1", 0.30, 40_000, 500, 100, 0.30, 100, 0.30),
        ("MID2", 0.50, 40_000, 500, 100, 0.50, 100, 0.50),
        ("MID3", 0.70, 40_000, 500, 100, 0.70, 100, 0.70),
        ("HIGH", 0.90, 40_000, 500, 1_800, 0.965, 200, 0.815),
    ]
    strata = []
    for category, p_world, background, q0, q1, pi1, q2, pi2 in rows:
        tiers = {
            QualityGroup.Q0: TierSpec(
                size=q0, mention_probabilities={source: p_world}
            ),
            QualityGroup.Q1: TierSpec(
                size=q1, mention_probabilities={source: pi1}
            ),
            QualityGroup.Q2: TierSpec(
                size=q2, mention_probabilities={source: pi2}
            ),
        }
        strata.append(
            StratumSpec(
                key=StratumKey(category, 2010),
                world_size=background + q0 + q1 + q2,
                tiers=tiers,
            )
        )
    return SynthConfig(strata=tuple(strata), seed=seed)
