"""Orchestration: decode -> face gate -> embed -> score -> report.

One unit of work is a video: every requested model is extracted in a
single decode pass, so the detector runs once per frame regardless of
how many models are scored. Workers parallelize across videos; results
are merged in manifest order, so the output is identical for any
``jobs`` value.

Cache entries are keyed by video content hash plus a fingerprint of
every parameter that can change the embeddings (resolution cap, stride,
detector, alignment template, model weights). Anything else is a miss.
"""

from __future__ import annotations

import hashlib
import json
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .cache import CacheKey, cache_load, cache_store, hash_params, hash_video_content
from .consistency import (
    ConsistencyScore,
    SourceAggregate,
    UnscorableVideoError,
    aggregate_source,
    score_mode1,
    score_mode2,
    select_reference,
)
from .embed import EmbeddingSet, InferenceError, embed_video, make_backend
from .facegate import (
    BBOX_FALLBACK_MARGIN,
    DEFAULT_ALIGNMENT_TEMPLATE,
    DEFAULT_DETECTOR_THRESHOLD,
    align_and_crop,
    detect_primary_face,
    make_detector,
)
from .frameio import VideoDecodeError, decode_frames, normalize_resolution
from .manifest import Manifest, Mode1Config, Mode2Config, validate_against_registry
from .registry import ModelRegistry, ModelSpec
from .report import BenchmarkReport, build_report, render_table

logger = logging.getLogger(__name__)

PIPELINE_FORMAT = 1  # bumping this invalidates every cache entry


@dataclass(frozen=True)
class ExtractConfig:
    detector: str = "full_frame"
    max_dim: int = 720
    stride: int = 1
    jobs: int = 1
    cache_dir: Path | None = None

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        if self.max_dim < 1:
            raise ValueError(f"max_dim must be >= 1, got {self.max_dim}")


@dataclass(frozen=True)
class ScoreConfig:
    mode: str = "mode1"
    metric: str = "cosine"
    mode1: Mode1Config = field(default_factory=Mode1Config)
    mode2: Mode2Config = field(default_factory=Mode2Config)
    seed: int = 0
    include_self: bool = False


@dataclass
class RunSummary:
    videos_total: int = 0
    videos_failed: list = field(default_factory=list)  # (video_id, error)
    cache_hits: int = 0
    cache_misses: int = 0
    frames_examined: int = 0
    frames_skipped: int = 0
    frames_dropped: int = 0
    embeddings: int = 0
    unscorable_total: int = 0
    warnings: Counter = field(default_factory=Counter)

    @property
    def partial(self) -> bool:
        return bool(self.videos_failed) or self.unscorable_total > 0

    def as_dict(self) -> dict:
        return {
            "videos_total": self.videos_total,
            "videos_failed": [list(item) for item in self.videos_failed],
            "cache_hits": self.cache_hits,
            "cache_misses": self.cache_misses,
            "frames_examined": self.frames_examined,
            "frames_skipped": self.frames_skipped,
            "frames_dropped": self.frames_dropped,
            "embeddings": self.embeddings,
            "unscorable_total": self.unscorable_total,
            "warnings": dict(sorted(self.warnings.items())),
        }


@dataclass
class _VideoJob:
    video_id: str
    source: str
    path: Path


@dataclass
class _VideoResult:
    video_id: str
    source: str
    sets: dict[str, EmbeddingSet] = field(default_factory=dict)
    cache_hits: int = 0
    cache_misses: int = 0
    warnings: Counter = field(default_factory=Counter)
    error: str | None = None


def _file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def detector_fingerprint(detector) -> dict:
    """Signature plus a content hash of any file the detector reads."""
    sig = dict(detector.signature())
    path = getattr(detector, "script_path", None) or getattr(detector, "model_path", None)
    if path is not None:
        sig["content_sha256"] = _file_sha256(Path(path))
    return sig


def extraction_params(
    spec: ModelSpec,
    *,
    max_dim: int,
    stride: int,
    detector_sig: dict,
    template,
) -> dict:
    """Everything besides the video bytes that determines the embeddings."""
    return {
        "format": PIPELINE_FORMAT,
        "max_dim": max_dim,
        "stride": stride,
        "detector": detector_sig,
        "margin": BBOX_FALLBACK_MARGIN,
        "template": [[float(x), float(y)] for x, y in template],
        "model": {
            "id": spec.id,
            "backend": spec.backend,
            "input_size": list(spec.input_size),
            "embedding_dim": spec.embedding_dim,
            "preprocessing": spec.preprocessing.to_dict(),
            "weights_sha256": None if spec.weights is None else _file_sha256(spec.weights),
        },
    }


def _process_video(
    job: _VideoJob,
    specs: list[ModelSpec],
    config: ExtractConfig,
    template,
    param_hashes: dict[str, str],
) -> _VideoResult:
    result = _VideoResult(video_id=job.video_id, source=job.source)
    try:
        content_hash = hash_video_content(job.path)
    except (OSError, VideoDecodeError) as exc:
        result.error = str(exc)
        return result

    pending: list[tuple[ModelSpec, CacheKey]] = []
    for spec in specs:
        key = CacheKey(job.video_id, spec.id, content_hash, param_hashes[spec.id])
        if config.cache_dir is not None:
            cached = cache_load(config.cache_dir, key)
            if cached is not None:
                result.sets[spec.id] = cached
                result.cache_hits += 1
                continue
            result.cache_misses += 1
        pending.append((spec, key))
    if not pending:
        return result

    detector = make_detector(config.detector)
    threshold = getattr(detector, "threshold", DEFAULT_DETECTOR_THRESHOLD)
    observations: dict[str, list] = {spec.id: [] for spec, _ in pending}
    total = 0
    skipped = 0
    try:
        for frame in decode_frames(job.path, stride=config.stride):
            frame = normalize_resolution(frame, config.max_dim)
            total += 1
            obs = detect_primary_face(frame, detector, threshold)
            if obs is None:
                skipped += 1
                continue
            for spec, _ in pending:
                observations[spec.id].append(
                    align_and_crop(
                        frame,
                        obs,
                        spec.input_size,
                        template=template,
                        warning_counter=result.warnings,
                    )
                )
        for spec, key in pending:
            embedding_set = embed_video(
                observations[spec.id],
                spec,
                job.video_id,
                total_frames=total,
                skipped_frames=skipped,
                warning_counter=result.warnings,
            )
            result.sets[spec.id] = embedding_set
            if config.cache_dir is not None:
                cache_store(embedding_set, config.cache_dir, key)
    except (VideoDecodeError, InferenceError) as exc:
        result.error = str(exc)
        result.sets.clear()
    return result


def extract_all(
    manifest: Manifest,
    registry: ModelRegistry,
    config: ExtractConfig,
    progress=None,
) -> tuple[dict[tuple[str, str], EmbeddingSet], RunSummary]:
    """Embed every (video, model) pair; returns sets keyed (video_id, model_id)."""
    specs = validate_against_registry(manifest, registry)
    template = registry.alignment_template or DEFAULT_ALIGNMENT_TEMPLATE
    detector_sig = detector_fingerprint(make_detector(config.detector))
    param_hashes = {
        spec.id: hash_params(
            extraction_params(
                spec,
                max_dim=config.max_dim,
                stride=config.stride,
                detector_sig=detector_sig,
                template=template,
            )
        )
        for spec in specs
    }

    jobs = [_VideoJob(vid, source, path) for vid, source, path in manifest.video_ids()]
    summary = RunSummary(videos_total=len(jobs))

    def work(job: _VideoJob) -> _VideoResult:
        return _process_video(job, specs, config, template, param_hashes)

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(job) for job in jobs]

    sets: dict[tuple[str, str], EmbeddingSet] = {}
    for result in results:
        summary.cache_hits += result.cache_hits
        summary.cache_misses += result.cache_misses
        summary.warnings.update(result.warnings)
        if result.error is not None:
            summary.videos_failed.append((result.video_id, result.error))
            logger.warning("video %s failed: %s", result.video_id, result.error)
            if progress is not None:
                progress(f"{result.video_id}: FAILED ({result.error})")
            continue
        for model_id, embedding_set in result.sets.items():
            sets[(result.video_id, model_id)] = embedding_set
            summary.frames_examined += embedding_set.total_frames
            summary.frames_skipped += embedding_set.skipped_frames
            summary.frames_dropped += embedding_set.dropped_frames
            summary.embeddings += len(embedding_set)
        if progress is not None:
            progress(
                f"{result.video_id}: {len(result.sets)} model(s), "
                f"{result.cache_hits} cached"
            )
    return sets, summary


@dataclass
class ScoreResult:
    mode: str
    metric: str
    scores: tuple[ConsistencyScore, ...]
    aggregates: tuple[SourceAggregate, ...]
    unscorable_counts: dict[tuple[str, str], int]  # cells with zero scorable videos
    n_unscorable: int


def score_all(
    sets: dict[tuple[str, str], EmbeddingSet],
    manifest: Manifest,
    config: ScoreConfig,
) -> ScoreResult:
    """Score every (source, model) cell; a missing or thin set is unscorable."""
    scores: list[ConsistencyScore] = []
    aggregates: list[SourceAggregate] = []
    empty_cells: dict[tuple[str, str], int] = {}
    n_unscorable = 0
    for source in manifest.sources:
        for model_id in manifest.models:
            cell_scores: list[ConsistencyScore] = []
            unscorable = 0
            for video in source.videos:
                video_id = f"{source.name}/{video.name}"
                embedding_set = sets.get((video_id, model_id))
                if embedding_set is None:
                    unscorable += 1
                    continue
                try:
                    if config.mode == "mode1":
                        ref = select_reference(embedding_set, config.mode1, config.metric)
                        cell_scores.append(
                            score_mode1(
                                embedding_set,
                                ref,
                                metric=config.metric,
                                include_self=config.include_self,
                            )
                        )
                    else:
                        cell_scores.append(
                            score_mode2(
                                embedding_set,
                                config.mode2,
                                config.seed,
                                metric=config.metric,
                            )
                        )
                except UnscorableVideoError:
                    unscorable += 1
            n_unscorable += unscorable
            if cell_scores:
                aggregates.append(
                    aggregate_source(source.name, cell_scores, n_unscorable=unscorable)
                )
                scores.extend(cell_scores)
            else:
                empty_cells[(source.name, model_id)] = unscorable
    return ScoreResult(
        mode=config.mode,
        metric=config.metric,
        scores=tuple(scores),
        aggregates=tuple(aggregates),
        unscorable_counts=empty_cells,
        n_unscorable=n_unscorable,
    )


def run_metadata(manifest: Manifest, registry: ModelRegistry, config: ScoreConfig) -> dict:
    return {
        "seed": config.seed,
        "num_pairs": config.mode2.num_pairs,
        "max_dim": manifest.max_dim,
        "registry_hash": registry.content_hash,
    }


def report_from_scores(
    manifest: Manifest,
    registry: ModelRegistry,
    score_result: ScoreResult,
    config: ScoreConfig,
) -> BenchmarkReport:
    return build_report(
        score_result.aggregates,
        sources=[(s.name, s.kind) for s in manifest.sources],
        models=manifest.models,
        mode=score_result.mode,
        metric=score_result.metric,
        metadata=run_metadata(manifest, registry, config),
        unscorable_counts=score_result.unscorable_counts,
    )


def scores_payload(
    manifest: Manifest,
    registry: ModelRegistry,
    results: list[ScoreResult],
    config: ScoreConfig,
    summary: RunSummary,
) -> dict:
    """JSON-ready run record; key order and row order are deterministic.

    Carries enough structure (source kinds, model order, unscorable cells)
    to re-render the report tables without the manifest.
    """
    videos = []
    aggregates = []
    unscorable = []
    for result in results:
        for score in result.scores:
            videos.append(
                {
                    "video_id": score.video_id,
                    "model": score.model_id,
                    "metric": score.metric,
                    "mode": score.mode,
                    "mean": score.mean,
                    "std": score.std,
                    "n_comparisons": score.n_comparisons,
                    "reference_index": score.reference_index,
                }
            )
        for agg in result.aggregates:
            aggregates.append(
                {
                    "source": agg.source_name,
                    "model": agg.model_id,
                    "metric": agg.metric,
                    "mode": agg.mode,
                    "mean_of_video_means": agg.mean_of_video_means,
                    "n_videos": len(agg.per_video),
                    "n_unscorable": agg.n_unscorable,
                }
            )
        for (source, model), count in result.unscorable_counts.items():
            unscorable.append(
                {
                    "source": source,
                    "model": model,
                    "metric": result.metric,
                    "mode": result.mode,
                    "count": count,
                }
            )
    metadata = run_metadata(manifest, registry, config)
    from fcbench import __version__

    metadata["toolkit_version"] = __version__
    return {
        "metadata": metadata,
        "sources": [{"name": s.name, "kind": s.kind} for s in manifest.sources],
        "models": list(manifest.models),
        "videos": videos,
        "aggregates": aggregates,
        "unscorable": unscorable,
        "summary": summary.as_dict(),
    }


def reports_from_payload(payload: dict) -> list[BenchmarkReport]:
    """Rebuild one report per (mode, metric) block found in a scores file."""
    sources = [(s["name"], s["kind"]) for s in payload["sources"]]
    models = payload["models"]
    blocks = sorted({(v["mode"], v["metric"]) for v in payload["videos"]})
    reports = []
    for mode, metric in blocks:
        scores_by_cell: dict[tuple[str, str], list[ConsistencyScore]] = {}
        for row in payload["videos"]:
            if (row["mode"], row["metric"]) != (mode, metric):
                continue
            source = row["video_id"].split("/", 1)[0]
            ref = row["reference_index"]
            scores_by_cell.setdefault((source, row["model"]), []).append(
                ConsistencyScore(
                    video_id=row["video_id"],
                    model_id=row["model"],
                    metric=metric,
                    mode=mode,
                    mean=row["mean"],
                    std=row["std"],
                    n_comparisons=row["n_comparisons"],
                    reference_index=None if ref is None else int(ref),
                )
            )
        partial_counts = {
            (a["source"], a["model"]): a["n_unscorable"]
            for a in payload["aggregates"]
            if (a["mode"], a["metric"]) == (mode, metric)
        }
        aggregates = [
            aggregate_source(source, cell_scores, n_unscorable=partial_counts.get((source, model), 0))
            for (source, model), cell_scores in sorted(scores_by_cell.items())
        ]
        empty_cells = {
            (u["source"], u["model"]): u["count"]
            for u in payload.get("unscorable", [])
            if (u["mode"], u["metric"]) == (mode, metric)
        }
        reports.append(
            build_report(
                aggregates,
                sources=sources,
                models=models,
                mode=mode,
                metric=metric,
                metadata=dict(payload["metadata"]),
                unscorable_counts=empty_cells,
            )
        )
    return reports


def write_json(path: Path, payload: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def run_benchmark(
    manifest: Manifest,
    registry: ModelRegistry,
    extract_config: ExtractConfig,
    score_configs: list[ScoreConfig],
    out_dir: Path | None = None,
    fmt: str = "markdown",
    progress=None,
) -> tuple[list[tuple[ScoreResult, BenchmarkReport]], RunSummary, list[Path]]:
    """Full pipeline; one report per ScoreConfig, shared extraction."""
    sets, summary = extract_all(manifest, registry, extract_config, progress=progress)
    pairs: list[tuple[ScoreResult, BenchmarkReport]] = []
    for config in score_configs:
        result = score_all(sets, manifest, config)
        summary.unscorable_total += result.n_unscorable
        pairs.append((result, report_from_scores(manifest, registry, result, config)))

    written: list[Path] = []
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        extension = {"plain": "txt", "markdown": "md", "csv": "csv", "json": "json"}[fmt]
        for result, report in pairs:
            path = out_dir / f"report_{result.mode}_{result.metric}.{extension}"
            path.write_text(render_table(report, fmt), encoding="utf-8")
            written.append(path)
        payload = scores_payload(
            manifest, registry, [r for r, _ in pairs], score_configs[0], summary
        )
        written.append(write_json(out_dir / "scores.json", payload))
    return pairs, summary, written
