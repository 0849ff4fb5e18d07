"""Reading and writing the canonical dataset files.

Three file roles, each either UTF-8 delimited text (comma- or tab-separated,
detected from the header line) or line-delimited JSON (``.jsonl`` /
``.ndjson``):

* publications: columns ``id``, ``year``, ``categories`` with categories
  pipe-separated inside one field (``A|B``); JSONL carries a list.
* mentions (one file per source): columns ``id``, ``count``.
* recommendations: columns ``id``, ``score``; one row per recommendation,
  so an id may repeat.

A JSON manifest names all paths and the year range::

    {
      "publications": "publications.csv",
      "mentions": {"citations": "mentions_citations.csv"},
      "recommendations": "recommendations.csv",
      "year_range": [2010, 2013]
    }

Relative manifest paths resolve against the manifest's directory.  Citation
counts are expected to be pre-windowed (a fixed citation window applied
upstream); this module never sees citing-paper dates.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import (
    DuplicateIdError,
    InvalidConfigError,
    InvalidScoreError,
    MalformedRowError,
    NegativeCountError,
)
from .records import VALID_SCORES, MentionSource, PublicationRecord

CATEGORY_SEPARATOR = "|"
_JSONL_SUFFIXES = {".jsonl", ".ndjson"}


@dataclass(frozen=True)
class DatasetManifest:
    publications_path: Path
    mentions_paths: dict[MentionSource, Path]
    recommendations_path: Path | None
    year_range: tuple[int, int]

    def __post_init__(self) -> None:
        low, high = self.year_range
        if low > high:
            raise InvalidConfigError(f"year_range {self.year_range} is inverted")


@dataclass
class ParseStats:
    rows: int = 0
    dropped_out_of_range: int = 0


@dataclass
class JoinStats:
    source: MentionSource
    matched: int = 0
    zero_filled: int = 0
    unmatched_rows: int = 0
    duplicate_rows: int = 0


@dataclass
class RecommendationStats:
    matched_rows: int = 0
    unmatched_rows: int = 0


@dataclass
class DatasetReport:
    publications: ParseStats
    joins: dict[MentionSource, JoinStats] = field(default_factory=dict)
    recommendations: RecommendationStats | None = None


def load_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConfigError(f"cannot read manifest {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise InvalidConfigError(f"manifest {path} must hold a JSON object")
    unknown = set(raw) - {"publications", "mentions", "recommendations", "year_range"}
    if unknown:
        raise InvalidConfigError(f"manifest {path} has unknown keys: {sorted(unknown)}")
    if "publications" not in raw:
        raise InvalidConfigError(f"manifest {path} is missing 'publications'")
    base = path.parent
    mentions: dict[MentionSource, Path] = {}
    for label, mention_path in dict(raw.get("mentions", {})).items():
        mentions[MentionSource.from_label(label)] = base / mention_path
    year_range = raw.get("year_range", [2010, 2013])
    if (
        not isinstance(year_range, (list, tuple))
        or len(year_range) != 2
        or not all(isinstance(y, int) for y in year_range)
    ):
        raise InvalidConfigError(f"manifest {path}: year_range must be two integers")
    recommendations = raw.get("recommendations")
    return DatasetManifest(
        publications_path=base / raw["publications"],
        mentions_paths=mentions,
        recommendations_path=base / recommendations if recommendations else None,
        year_range=(year_range[0], year_range[1]),
    )


def _iter_rows(path: Path, columns: Sequence[str]) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, row_dict) for either file format.

    Line numbers are 1-based and count the header line of delimited files.
    """
    if not path.exists():
        raise InvalidConfigError(f"input file {path} does not exist")
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() in _JSONL_SUFFIXES:
        for line_number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRowError(path, line_number, f"bad JSON: {exc.msg}")
            if not isinstance(obj, dict):
                raise MalformedRowError(path, line_number, "row is not an object")
            yield line_number, obj
        return
    lines = text.splitlines()
    if not lines:
        return
    delimiter = "\t" if "\t" in lines[0] else ","
    header = next(csv.reader([lines[0]], delimiter=delimiter))
    missing = [c for c in columns if c not in header]
    if missing:
        raise MalformedRowError(path, 1, f"header lacks columns {missing}")
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        values = next(csv.reader([line], delimiter=delimiter))
        if len(values) != len(header):
            raise MalformedRowError(
                path, line_number, f"expected {len(header)} fields, got {len(values)}"
            )
        yield line_number, dict(zip(header, values))


def _parse_int(raw, path: Path, line_number: int, label: str) -> int:
    if isinstance(raw, int) and not isinstance(raw, bool):
        return raw
    try:
        return int(str(raw).strip())
    except (TypeError, ValueError):
        raise MalformedRowError(path, line_number, f"{label} {raw!r} is not an integer")


def parse_publications(
    path: str | Path, year_range: tuple[int, int]
) -> tuple[list[PublicationRecord], ParseStats]:
    """Parse publication rows, dropping (and counting) out-of-range years.

    Missing ids, empty category lists, and malformed years fail with the
    offending line number; duplicate ids are rejected outright.
    """
    path = Path(path)
    stats = ParseStats()
    records: list[PublicationRecord] = []
    seen: set[str] = set()
    low, high = year_range
    for line_number, row in _iter_rows(path, ("id", "year", "categories")):
        stats.rows += 1
        record_id = str(row.get("id") or "").strip()
        if not record_id:
            raise MalformedRowError(path, line_number, "missing id")
        year = _parse_int(row.get("year"), path, line_number, "year")
        raw_categories = row.get("categories")
        if isinstance(raw_categories, str):
            categories = [c for c in raw_categories.split(CATEGORY_SEPARATOR) if c]
        elif isinstance(raw_categories, (list, tuple)):
            categories = [str(c) for c in raw_categories if c]
        else:
            categories = []
        if not categories:
            raise MalformedRowError(path, line_number, "empty category list")
        if record_id in seen:
            raise DuplicateIdError(f"{path}:{line_number}: duplicate id {record_id!r}")
        seen.add(record_id)
        if not (low <= year <= high):
            stats.dropped_out_of_range += 1
            continue
        records.append(PublicationRecord(record_id, year, tuple(categories)))
    return records, stats


def join_mentions(
    records: Sequence[PublicationRecord],
    source: MentionSource,
    path: str | Path,
) -> JoinStats:
    """Attach mention counts by id; absent records get an explicit 0.

    Mention rows whose id matches no record are counted, not fatal.
    Duplicate rows for one id are summed and counted as duplicates.
    """
    path = Path(path)
    by_id = {record.id: record for record in records}
    counts: dict[str, int] = {}
    stats = JoinStats(source=source)
    for line_number, row in _iter_rows(path, ("id", "count")):
        record_id = str(row.get("id") or "").strip()
        if not record_id:
            raise MalformedRowError(path, line_number, "missing id")
        count = _parse_int(row.get("count"), path, line_number, "count")
        if count < 0:
            raise NegativeCountError(
                f"{path}:{line_number}: negative count {count} for id {record_id!r}"
            )
        if record_id not in by_id:
            stats.unmatched_rows += 1
            continue
        if record_id in counts:
            stats.duplicate_rows += 1
            counts[record_id] += count
        else:
            counts[record_id] = count
    for record in records:
        if record.id in counts:
            record.mentions[source] = counts[record.id]
            stats.matched += 1
        else:
            record.mentions[source] = 0
            stats.zero_filled += 1
    return stats


def parse_recommendations(
    records: Sequence[PublicationRecord],
    path: str | Path,
) -> RecommendationStats:
    """Append recommendation scores to matched records, in file order."""
    path = Path(path)
    by_id = {record.id: record for record in records}
    stats = RecommendationStats()
    for line_number, row in _iter_rows(path, ("id", "score")):
        record_id = str(row.get("id") or "").strip()
        if not record_id:
            raise MalformedRowError(path, line_number, "missing id")
        score = _parse_int(row.get("score"), path, line_number, "score")
        if score not in VALID_SCORES:
            raise InvalidScoreError(
                f"{path}:{line_number}: score {score} outside {VALID_SCORES}"
            )
        record = by_id.get(record_id)
        if record is None:
            stats.unmatched_rows += 1
            continue
        record.recommendation_scores = record.recommendation_scores + (score,)
        stats.matched_rows += 1
    return stats


def load_dataset(
    manifest: DatasetManifest,
) -> tuple[list[PublicationRecord], DatasetReport]:
    """Parse publications, join every mentions file, attach recommendations."""
    records, parse_stats = parse_publications(
        manifest.publications_path, manifest.year_range
    )
    report = DatasetReport(publications=parse_stats)
    for source in sorted(manifest.mentions_paths, key=lambda s: s.value):
        report.joins[source] = join_mentions(
            records, source, manifest.mentions_paths[source]
        )
    if manifest.recommendations_path is not None:
        report.recommendations = parse_recommendations(
            records, manifest.recommendations_path
        )
    return records, report


# --- canonical writers (also used by the synthetic generator) -----------------


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_publications(
    records: Sequence[PublicationRecord], path: str | Path
) -> None:
    _write_csv(
        Path(path),
        ("id", "year", "categories"),
        (
            (r.id, r.year, CATEGORY_SEPARATOR.join(r.categories))
            for r in records
        ),
    )


def write_mentions(
    records: Sequence[PublicationRecord],
    source: MentionSource,
    path: str | Path,
) -> None:
    _write_csv(
        Path(path),
        ("id", "count"),
        ((r.id, r.mention_count(source)) for r in records),
    )


def write_recommendations(
    records: Sequence[PublicationRecord], path: str | Path
) -> None:
    rows = []
    for record in records:
        for score in record.recommendation_scores:
            rows.append((record.id, score))
    _write_csv(Path(path), ("id", "score"), rows)


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    """Write a manifest whose paths are stored relative to its directory."""
    path = Path(path)
    base = path.parent

    def rel(p: Path) -> str:
        try:
            return str(p.relative_to(base))
        except ValueError:
            return str(p)

    payload: dict = {
        "publications": rel(manifest.publications_path),
        "mentions": {
            source.value: rel(p)
            for source, p in sorted(
                manifest.mentions_paths.items(), key=lambda kv: kv[0].value
            )
        },
        "year_range": list(manifest.year_range),
    }
    if manifest.recommendations_path is not None:
        payload["recommendations"] = rel(manifest.recommendations_path)
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
