"""Command line interface.

    fcbench run      --manifest run.yaml [--out DIR] [--format markdown]
    fcbench extract  --manifest run.yaml --cache-dir DIR
    fcbench score    --manifest run.yaml [--out DIR]
    fcbench report   SCORES_JSON [--format csv] [--out DIR]

Flags override the manifest; unset flags leave it alone. --cache-dir
falls back to the FCB_CACHE_DIR environment variable. Progress goes to
stderr, data to stdout or files. Exit status: 0 everything scored,
2 finished but some videos failed or were unscorable, 1 fatal.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from .facegate import DetectorError
from .frameio import VideoDecodeError
from .manifest import (
    Manifest,
    ManifestError,
    Mode1Config,
    Mode2Config,
    load_manifest,
    validate_against_registry,
)
from .pipeline import (
    ExtractConfig,
    ScoreConfig,
    extract_all,
    reports_from_payload,
    run_benchmark,
    score_all,
    scores_payload,
    write_json,
)
from .registry import ModelRegistry, RegistryError, load_registry
from .report import FORMATS, ReportError, render_table
from .validation import METRICS, check_seed

CACHE_ENV_VAR = "FCB_CACHE_DIR"

_EXTENSIONS = {"plain": "txt", "markdown": "md", "csv": "csv", "json": "json"}


def _progress(message: str):
    print(message, file=sys.stderr)


def _add_pipeline_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--manifest", required=True, type=Path, help="run manifest (YAML)")
    parser.add_argument("--registry", type=Path, default=None, help="model registry file")
    parser.add_argument("--models", default=None, help="comma-separated model ids (override)")
    parser.add_argument("--metric", choices=METRICS, default=None, help="distance metric (override)")
    parser.add_argument("--pairs", type=int, default=None, help="random pairs per video (override)")
    parser.add_argument("--seed", type=int, default=None, help="unsigned 64-bit run seed (override)")
    parser.add_argument(
        "--reference", default=None, help="mode1 reference: first_valid | index:<k> | medoid"
    )
    parser.add_argument("--max-dim", dest="max_dim", type=int, default=None, help="resolution cap (override)")
    parser.add_argument("--stride", type=int, default=1, help="keep every n-th decoded frame")
    parser.add_argument("--jobs", type=int, default=1, help="videos processed in parallel")
    parser.add_argument(
        "--cache-dir",
        dest="cache_dir",
        type=Path,
        default=None,
        help=f"embedding cache directory (default: ${CACHE_ENV_VAR})",
    )
    parser.add_argument(
        "--detector",
        default="full_frame",
        help="full_frame | stub:<script.json> | neural:<model.onnx>[:threshold]",
    )


def _add_scoring_flags(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--mode", choices=("mode1", "mode2", "both"), default="both", help="which protocol(s) to score"
    )
    parser.add_argument(
        "--include-self",
        dest="include_self",
        action="store_true",
        help="mode1: keep the reference-vs-itself comparison",
    )
    parser.add_argument("--out", type=Path, default=None, help="output directory (default: manifest output_dir)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fcbench", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="extract, score and render reports")
    _add_pipeline_flags(run)
    _add_scoring_flags(run)
    run.add_argument("--format", choices=FORMATS, default="markdown", help="report table format")
    run.set_defaults(func=cmd_run)

    extract = sub.add_parser("extract", help="fill the embedding cache, no scoring")
    _add_pipeline_flags(extract)
    extract.add_argument("--out", type=Path, default=None, help="write an extraction summary JSON here")
    extract.set_defaults(func=cmd_extract)

    score = sub.add_parser("score", help="extract and score, write scores.json only")
    _add_pipeline_flags(score)
    _add_scoring_flags(score)
    score.set_defaults(func=cmd_score)

    report = sub.add_parser("report", help="re-render tables from a scores.json")
    report.add_argument("scores", type=Path, help="scores.json from a previous run")
    report.add_argument("--format", choices=FORMATS, default="markdown", help="report table format")
    report.add_argument("--out", type=Path, default=None, help="write files here instead of stdout")
    report.set_defaults(func=cmd_report)

    return parser


def _resolve_cache_dir(args) -> Path | None:
    if args.cache_dir is not None:
        return args.cache_dir
    env = os.environ.get(CACHE_ENV_VAR)
    return Path(env) if env else None


def _apply_overrides(manifest: Manifest, args) -> Manifest:
    updates: dict = {}
    if args.models:
        models = tuple(m.strip() for m in args.models.split(",") if m.strip())
        if not models:
            raise ManifestError("--models needs at least one model id")
        updates["models"] = models
    if args.metric:
        updates["metric"] = args.metric
    if args.pairs is not None:
        updates["mode2"] = Mode2Config(num_pairs=args.pairs)
    if args.seed is not None:
        updates["seed"] = check_seed(args.seed)
    if args.reference:
        updates["mode1"] = Mode1Config.parse(args.reference)
    if args.max_dim is not None:
        if args.max_dim < 1:
            raise ManifestError(f"--max-dim must be >= 1, got {args.max_dim}")
        updates["max_dim"] = args.max_dim
    return dataclasses.replace(manifest, **updates) if updates else manifest


def _load_inputs(args) -> tuple[Manifest, ModelRegistry, ExtractConfig]:
    manifest = _apply_overrides(load_manifest(args.manifest), args)
    registry = load_registry(args.registry) if args.registry else ModelRegistry.builtin()
    validate_against_registry(manifest, registry)
    config = ExtractConfig(
        detector=args.detector,
        max_dim=manifest.max_dim,
        stride=args.stride,
        jobs=args.jobs,
        cache_dir=_resolve_cache_dir(args),
    )
    return manifest, registry, config


def _score_configs(manifest: Manifest, args) -> list[ScoreConfig]:
    modes = ("mode1", "mode2") if args.mode == "both" else (args.mode,)
    return [
        ScoreConfig(
            mode=mode,
            metric=manifest.metric,
            mode1=manifest.mode1,
            mode2=manifest.mode2,
            seed=manifest.seed,
            include_self=args.include_self,
        )
        for mode in modes
    ]


def _print_summary(summary):
    stats = summary.as_dict()
    _progress(
        "done: {videos_total} video(s), {embeddings} embeddings "
        "({frames_skipped} frames skipped, {frames_dropped} dropped), "
        "cache {cache_hits} hit / {cache_misses} miss".format(**stats)
    )
    for video_id, error in summary.videos_failed:
        _progress(f"failed: {video_id}: {error}")
    if summary.unscorable_total:
        _progress(f"unscorable videos: {summary.unscorable_total}")


def cmd_run(args) -> int:
    manifest, registry, extract_config = _load_inputs(args)
    out_dir = args.out if args.out is not None else manifest.output_dir
    pairs, summary, written = run_benchmark(
        manifest,
        registry,
        extract_config,
        _score_configs(manifest, args),
        out_dir=out_dir,
        fmt=args.format,
        progress=_progress,
    )
    for _, report in pairs:
        sys.stdout.write(render_table(report, args.format))
        sys.stdout.write("\n")
    _print_summary(summary)
    for path in written:
        _progress(f"wrote {path}")
    return 2 if summary.partial else 0


def cmd_extract(args) -> int:
    manifest, registry, config = _load_inputs(args)
    if config.cache_dir is None:
        print(
            f"extract needs --cache-dir or ${CACHE_ENV_VAR}; embeddings would be discarded",
            file=sys.stderr,
        )
        return 1
    _, summary = extract_all(manifest, registry, config, progress=_progress)
    _print_summary(summary)
    if args.out is not None:
        path = args.out / "extract_summary.json" if args.out.suffix == "" else args.out
        write_json(path, summary.as_dict())
        _progress(f"wrote {path}")
    return 2 if summary.videos_failed else 0


def cmd_score(args) -> int:
    manifest, registry, extract_config = _load_inputs(args)
    out_dir = args.out if args.out is not None else manifest.output_dir
    sets, summary = extract_all(manifest, registry, extract_config, progress=_progress)
    configs = _score_configs(manifest, args)
    results = []
    for config in configs:
        result = score_all(sets, manifest, config)
        summary.unscorable_total += result.n_unscorable
        results.append(result)
    payload = scores_payload(manifest, registry, results, configs[0], summary)
    path = write_json(out_dir / "scores.json", payload)
    _print_summary(summary)
    _progress(f"wrote {path}")
    return 2 if summary.partial else 0


def cmd_report(args) -> int:
    try:
        payload = json.loads(args.scores.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read scores file {args.scores}: {exc}", file=sys.stderr)
        return 1
    reports = reports_from_payload(payload)
    if not reports:
        print(f"{args.scores}: no scored videos to report", file=sys.stderr)
        return 1
    if args.out is None:
        for report in reports:
            sys.stdout.write(render_table(report, args.format))
            sys.stdout.write("\n")
        return 0
    args.out.mkdir(parents=True, exist_ok=True)
    for report in reports:
        path = args.out / f"report_{report.mode}_{report.metric}.{_EXTENSIONS[args.format]}"
        path.write_text(render_table(report, args.format), encoding="utf-8")
        _progress(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        ManifestError,
        RegistryError,
        ReportError,
        DetectorError,
        VideoDecodeError,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
