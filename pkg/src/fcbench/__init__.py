"""Face consistency benchmark: score identity drift in videos.

Per video, faces are detected, aligned and embedded frame by frame;
consistency is the spread of embedding distances, either against a
reference frame or across randomly sampled frame pairs. Per-source
tables compare real footage with generated clips.
"""

from .cache import CacheKey, cache_load, cache_store, hash_params, hash_video_content
from .consistency import (
    ConsistencyScore,
    SourceAggregate,
    UnscorableVideoError,
    aggregate_source,
    distance,
    pairwise_distance_matrix,
    sample_pairs,
    score_mode1,
    score_mode2,
    select_reference,
)
from .embed import Embedding, EmbeddingSet, embed_crop, embed_video, toy_embed
from .estimators import ConsistencyScorer, FaceEmbeddingExtractor
from .facegate import (
    FaceObservation,
    align_and_crop,
    detect_primary_face,
    make_detector,
    select_primary,
    solve_similarity,
)
from .frameio import FrameRecord, VideoDecodeError, decode_frames, normalize_resolution
from .manifest import (
    Manifest,
    ManifestError,
    Mode1Config,
    Mode2Config,
    SourceGroup,
    load_manifest,
    save_manifest,
    validate_against_registry,
)
from .pipeline import (
    ExtractConfig,
    RunSummary,
    ScoreConfig,
    ScoreResult,
    extract_all,
    run_benchmark,
    score_all,
)
from .registry import ModelRegistry, ModelSpec, Preprocessing, RegistryError, load_registry
from .report import BenchmarkReport, build_report, emit_plot_data, render_table
from .rng import SplitMix64, fnv1a64, splitmix64_mix, stream_seed, video_stream

__version__ = "0.1.0"

__all__ = [
    "BenchmarkReport",
    "CacheKey",
    "ConsistencyScore",
    "ConsistencyScorer",
    "Embedding",
    "EmbeddingSet",
    "ExtractConfig",
    "FaceEmbeddingExtractor",
    "FaceObservation",
    "FrameRecord",
    "Manifest",
    "ManifestError",
    "Mode1Config",
    "Mode2Config",
    "ModelRegistry",
    "ModelSpec",
    "Preprocessing",
    "RegistryError",
    "RunSummary",
    "ScoreConfig",
    "ScoreResult",
    "SourceAggregate",
    "SourceGroup",
    "SplitMix64",
    "UnscorableVideoError",
    "VideoDecodeError",
    "aggregate_source",
    "align_and_crop",
    "build_report",
    "cache_load",
    "cache_store",
    "decode_frames",
    "detect_primary_face",
    "distance",
    "embed_crop",
    "embed_video",
    "emit_plot_data",
    "extract_all",
    "fnv1a64",
    "hash_params",
    "hash_video_content",
    "load_manifest",
    "load_registry",
    "make_detector",
    "normalize_resolution",
    "pairwise_distance_matrix",
    "render_table",
    "run_benchmark",
    "sample_pairs",
    "save_manifest",
    "score_all",
    "score_mode1",
    "score_mode2",
    "select_primary",
    "select_reference",
    "solve_similarity",
    "splitmix64_mix",
    "stream_seed",
    "toy_embed",
    "validate_against_registry",
    "video_stream",
    "__version__",
]
