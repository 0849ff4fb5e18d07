"""Command-line front end: ingest -> cohort -> indicators -> reports.

Subcommands::

    sparsenorm compute   --manifest m.json --out reports/
    sparsenorm bootstrap --manifest m.json --out reports/ --replicates 1000
    sparsenorm simulate  --config synth.json --out data/
    sparsenorm validate  --manifest m.json

``compute`` and ``bootstrap`` write both ``report.csv`` and ``report.json``
into the output directory and echo one of them to stdout.  All outputs are
byte-stable for fixed inputs and flags.  Exit codes: 0 success, 2 input
error, 3 computation error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from pathlib import Path

from . import bootstrap as bootstrap_mod
from . import cohort, indicators, ingest, synth
from .errors import (
    AllStrataRemovedError,
    EmptyTableError,
    SparseNormError,
)
from .indicators import CiKind, Indicator, ZeroPolicy
from .records import MentionSource

INDICATOR_FLAGS = {
    "emnpc": Indicator.EMNPC,
    "mnpc": Indicator.MNPC,
    "mhq": Indicator.MHQ,
}

ZERO_POLICY_FLAGS = {
    "continuity": ZeroPolicy.CONTINUITY,
    "drop": ZeroPolicy.DROP_STRATUM,
    "error": ZeroPolicy.ERROR,
}

GROUP_FLAGS = {
    "q0": cohort.QualityGroup.Q0,
    "q1": cohort.QualityGroup.Q1,
    "q2": cohort.QualityGroup.Q2,
}


def _add_compute_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--manifest", required=True, help="dataset manifest (JSON)")
    parser.add_argument("--out", required=True, help="output directory for reports")
    parser.add_argument(
        "--indicator",
        choices=[*INDICATOR_FLAGS, "all"],
        default="all",
        help="which indicator(s) to compute",
    )
    parser.add_argument(
        "--source",
        action="append",
        metavar="SOURCE",
        help="mention source; repeatable; default: every source in the manifest",
    )
    parser.add_argument(
        "--group",
        choices=[*GROUP_FLAGS, "all"],
        default="all",
        help="quality group(s) to analyze",
    )
    parser.add_argument(
        "--zero-policy",
        choices=list(ZERO_POLICY_FLAGS),
        default="continuity",
        help="how to handle strata with proportions of exactly 0 or 1",
    )
    parser.add_argument(
        "--min-stratum-papers",
        type=int,
        default=10,
        help="keep strata with at least this many world papers",
    )
    parser.add_argument(
        "--min-group-stratum-papers",
        type=int,
        default=1,
        help="keep strata with at least this many group papers "
        "(10 is recommended when computing the EMNPC)",
    )
    parser.add_argument(
        "--allow-unmixed-outcomes",
        action="store_true",
        help="keep strata whose world papers are all mentioned or all unmentioned",
    )
    parser.add_argument(
        "--all-categories",
        action="store_true",
        help="tabulate every category, not only those touched by a recommendation",
    )
    parser.add_argument(
        "--world",
        choices=[cohort.WORLD_INCLUSIVE, cohort.WORLD_EXCLUSIVE],
        default=cohort.WORLD_INCLUSIVE,
        help="whether world cells include the group's papers",
    )
    parser.add_argument(
        "--z",
        type=float,
        default=indicators.DEFAULT_Z,
        help="normal multiplier for closed-form intervals (1.96 for 95%%)",
    )
    parser.add_argument(
        "--format",
        choices=["csv", "json"],
        default="csv",
        help="which report format to echo to stdout (both files are written)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsenorm",
        description="Field- and time-normalized impact indicators for sparse "
        "mention-count data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    compute = sub.add_parser(
        "compute", help="closed-form indicator estimates per group and source"
    )
    _add_compute_options(compute)
    compute.set_defaults(func=cmd_compute)

    boot = sub.add_parser(
        "bootstrap", help="resampling intervals instead of closed-form ones"
    )
    _add_compute_options(boot)
    boot.add_argument(
        "--replicates", "-B", type=int, default=1000, help="bootstrap replicates"
    )
    boot.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    boot.add_argument(
        "--resample-world",
        action="store_true",
        help="resample the whole record set instead of the group only",
    )
    boot.add_argument(
        "--ci-level", type=float, default=0.95, help="confidence level"
    )
    boot.add_argument(
        "--emit-replicates",
        action="store_true",
        help="also write per-replicate values for diagnostics",
    )
    boot.set_defaults(func=cmd_bootstrap)

    simulate = sub.add_parser(
        "simulate", help="generate a synthetic dataset in the canonical formats"
    )
    simulate.add_argument("--config", required=True, help="generator config (JSON)")
    simulate.add_argument("--out", required=True, help="output directory")
    simulate.add_argument(
        "--seed", type=int, default=None, help="override the config seed"
    )
    simulate.set_defaults(func=cmd_simulate)

    validate = sub.add_parser(
        "validate", help="check a manifest and its files without computing"
    )
    validate.add_argument("--manifest", required=True)
    validate.set_defaults(func=cmd_validate)

    return parser


def _fingerprint(manifest: ingest.DatasetManifest) -> str:
    """Stable content hash over every input file the manifest names."""
    digest = hashlib.sha256()
    paths = [("publications", manifest.publications_path)]
    for source in sorted(manifest.mentions_paths, key=lambda s: s.value):
        paths.append((f"mentions:{source.value}", manifest.mentions_paths[source]))
    if manifest.recommendations_path is not None:
        paths.append(("recommendations", manifest.recommendations_path))
    for role, path in paths:
        digest.update(role.encode("utf-8"))
        digest.update(hashlib.sha256(Path(path).read_bytes()).digest())
    return digest.hexdigest()


def _resolve_sources(args, manifest: ingest.DatasetManifest) -> list[MentionSource]:
    available = sorted(manifest.mentions_paths, key=lambda s: s.value)
    if not args.source or "all" in args.source:
        if not available:
            raise EmptyTableError("the manifest names no mention sources")
        return available
    requested = [MentionSource.from_label(label) for label in args.source]
    for source in requested:
        if source not in manifest.mentions_paths:
            raise EmptyTableError(
                f"source {source.value} is not in the manifest"
            )
    return sorted(set(requested), key=lambda s: s.value)


def _resolve_groups(args) -> list[cohort.QualityGroup]:
    if args.group == "all":
        return [cohort.QualityGroup.Q0, cohort.QualityGroup.Q1, cohort.QualityGroup.Q2]
    return [GROUP_FLAGS[args.group]]


def _resolve_indicators(args) -> list[Indicator]:
    if args.indicator == "all":
        return [Indicator.EMNPC, Indicator.MNPC, Indicator.MHQ]
    return [INDICATOR_FLAGS[args.indicator]]


def _configuration_echo(args, extra: dict | None = None) -> dict:
    echo = {
        "manifest": args.manifest,
        "indicator": args.indicator,
        "source": args.source or ["all"],
        "group": args.group,
        "zero_policy": args.zero_policy,
        "min_stratum_papers": args.min_stratum_papers,
        "min_group_stratum_papers": args.min_group_stratum_papers,
        "require_mixed_outcomes": not args.allow_unmixed_outcomes,
        "restrict_to_recommended_categories": not args.all_categories,
        "world": args.world,
        "z": args.z,
    }
    if extra:
        echo.update(extra)
    return echo


def _prepare_dataset(args):
    manifest = ingest.load_manifest(args.manifest)
    records, report = ingest.load_dataset(manifest)
    if not records:
        raise EmptyTableError(
            f"no publication records in {manifest.publications_path}"
        )
    categories = None
    if not args.all_categories:
        recommended = cohort.recommended_record_ids(records)
        categories = cohort.restrict_to_recommended_categories(records, recommended)
        if not categories:
            raise AllStrataRemovedError(
                "no category carries a recommended publication; "
                "rerun with --all-categories to analyze everything"
            )
    filter_config = cohort.FilterConfig(
        min_stratum_papers=args.min_stratum_papers,
        require_mixed_outcomes=not args.allow_unmixed_outcomes,
        min_group_stratum_papers=args.min_group_stratum_papers,
        restrict_to_recommended_categories=not args.all_categories,
    )
    return manifest, records, report, categories, filter_config


def _ingest_echo(report: ingest.DatasetReport) -> dict:
    echo = {
        "publication_rows": report.publications.rows,
        "dropped_out_of_range": report.publications.dropped_out_of_range,
        "joins": {
            source.value: {
                "matched": stats.matched,
                "zero_filled": stats.zero_filled,
                "unmatched_rows": stats.unmatched_rows,
                "duplicate_rows": stats.duplicate_rows,
            }
            for source, stats in report.joins.items()
        },
    }
    if report.recommendations is not None:
        echo["recommendations"] = {
            "matched_rows": report.recommendations.matched_rows,
            "unmatched_rows": report.recommendations.unmatched_rows,
        }
    return echo


def _write_reports(out_dir: Path, payload: dict, echo_format: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    json_text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    (out_dir / "report.json").write_text(json_text, encoding="utf-8")
    lines = [
        "group,source,indicator,value,ci_lower,ci_upper,ci_kind,"
        "value_display,ci_lower_display,ci_upper_display"
    ]
    for row in payload["results"]:
        lines.append(
            ",".join(
                [
                    row["group"],
                    row["source"],
                    row["indicator"],
                    repr(row["value"]),
                    repr(row["ci_lower"]),
                    repr(row["ci_upper"]),
                    row["ci_kind"],
                    f"{row['value']:.4f}",
                    f"{row['ci_lower']:.4f}",
                    f"{row['ci_upper']:.4f}",
                ]
            )
        )
    csv_text = "\n".join(lines) + "\n"
    (out_dir / "report.csv").write_text(csv_text, encoding="utf-8")
    sys.stdout.write(json_text if echo_format == "json" else csv_text)


def _estimate_row(
    group: cohort.QualityGroup,
    source: MentionSource,
    estimate: indicators.IndicatorEstimate,
) -> dict:
    return {
        "group": group.value,
        "source": source.value,
        "indicator": estimate.method.value,
        "value": estimate.value,
        "ci_lower": estimate.ci_lower,
        "ci_upper": estimate.ci_upper,
        "ci_kind": estimate.ci_kind.value,
    }


def _sorted_results(rows: list[dict]) -> list[dict]:
    return sorted(rows, key=lambda r: (r["group"], r["source"], r["indicator"]))


def cmd_compute(args) -> int:
    manifest, records, report, categories, filter_config = _prepare_dataset(args)
    zero_policy = ZERO_POLICY_FLAGS[args.zero_policy]
    results: list[dict] = []
    filter_log: list[dict] = []
    for group in _resolve_groups(args):
        membership = cohort.group_membership(group)
        for source in _resolve_sources(args, manifest):
            table = cohort.build_strata(
                records, membership, source, world=args.world, categories=categories
            )
            outcome = cohort.filter_strata(table, filter_config)
            prepared = indicators.apply_zero_policy(outcome.table, zero_policy)
            filter_log.append(
                {
                    "group": group.value,
                    "source": source.value,
                    "continuity_applied": prepared.continuity_applied,
                    "removed": [
                        {"category": key.category, "year": key.year, "rule": rule}
                        for key, rule in outcome.removed
                    ],
                }
            )
            for indicator in _resolve_indicators(args):
                estimate = indicators.compute_indicator(prepared, indicator, args.z)
                results.append(_estimate_row(group, source, estimate))
    payload = {
        "command": "compute",
        "configuration": _configuration_echo(args),
        "dataset_fingerprint": _fingerprint(manifest),
        "ingest": _ingest_echo(report),
        "filters": filter_log,
        "results": _sorted_results(results),
    }
    _write_reports(Path(args.out), payload, args.format)
    return 0


def cmd_bootstrap(args) -> int:
    manifest, records, report, categories, filter_config = _prepare_dataset(args)
    zero_policy = ZERO_POLICY_FLAGS[args.zero_policy]
    config = bootstrap_mod.BootstrapConfig(
        replicates=args.replicates,
        seed=args.seed,
        resample_world=args.resample_world,
        ci_level=args.ci_level,
    )
    out_dir = Path(args.out)
    results: list[dict] = []
    for group in _resolve_groups(args):
        membership = cohort.group_membership(group)
        for source in _resolve_sources(args, manifest):
            for indicator in _resolve_indicators(args):
                estimate = bootstrap_mod.bootstrap_ci(
                    records,
                    membership,
                    source,
                    indicator,
                    config,
                    zero_policy=zero_policy,
                    filter_config=filter_config,
                    categories=categories,
                    world=args.world,
                )
                results.append(_estimate_row(group, source, estimate))
                if args.emit_replicates:
                    values = bootstrap_mod.bootstrap_replicates(
                        records,
                        membership,
                        source,
                        indicator,
                        config,
                        zero_policy=zero_policy,
                        filter_config=filter_config,
                        categories=categories,
                        world=args.world,
                    )
                    out_dir.mkdir(parents=True, exist_ok=True)
                    name = f"replicates_{group.value}_{source.value}_{indicator.value}.csv"
                    (out_dir / name).write_text(
                        "replicate,value\n"
                        + "".join(
                            f"{i},{repr(float(v))}\n" for i, v in enumerate(values)
                        ),
                        encoding="utf-8",
                    )
    payload = {
        "command": "bootstrap",
        "configuration": _configuration_echo(
            args,
            {
                "replicates": args.replicates,
                "seed": args.seed,
                "resample_world": args.resample_world,
                "ci_level": args.ci_level,
                "rng_algorithm": bootstrap_mod.RNG_ALGORITHM,
            },
        ),
        "dataset_fingerprint": _fingerprint(manifest),
        "ingest": _ingest_echo(report),
        "filters": [],
        "results": _sorted_results(results),
    }
    _write_reports(out_dir, payload, args.format)
    return 0


def cmd_simulate(args) -> int:
    config = synth.load_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    out_dir = Path(args.out)
    manifest_path = synth.write_dataset(config, out_dir)
    echo = dict(config.to_dict())
    echo["rng_algorithm"] = synth.RNG_ALGORITHM
    (out_dir / "generator_config.json").write_text(
        json.dumps(echo, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    sys.stdout.write(f"{manifest_path}\n")
    return 0


def cmd_validate(args) -> int:
    manifest = ingest.load_manifest(args.manifest)
    records, report = ingest.load_dataset(manifest)
    summary = {
        "manifest": args.manifest,
        "records": len(records),
        "dataset_fingerprint": _fingerprint(manifest),
        "ingest": _ingest_echo(report),
        "quality_groups": {
            group.value: sum(
                1 for r in records if cohort.quality_group(r) is group
            )
            for group in cohort.QualityGroup
        },
    }
    sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SparseNormError as exc:
        label = type(exc).__name__
        label = label[:-5] if label.endswith("Error") else label
        print(f"error: {label}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
