"""Run manifest: the single human-editable file declaring a benchmark run.

YAML (JSON is a YAML subset, so both parse) with exactly these top-level
keys::

    sources:                  # at least one
      - name: real            # unique within the manifest
        kind: real            # "real" | "generated"
        videos: [clips/a.mp4, frames/b]   # files or frame folders
    models: [toy]             # unique ids, resolved against the registry
    metric: cosine            # cosine | euclidean | euclidean_l2
    mode1: {reference: first_valid}   # first_valid | index:<k> | medoid
    mode2: {num_pairs: 200}
    max_dim: 720
    seed: 0                   # unsigned 64-bit
    output_dir: out

Unknown keys are rejected, not ignored: a silently mistyped key would
corrupt benchmark comparability. Video paths are resolved relative to
the manifest file. Real sources are scored identically to generated ones
and only distinguished in reporting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .registry import ModelRegistry, ModelSpec
from .validation import METRICS, SOURCE_KINDS, check_metric, check_seed

DEFAULT_NUM_PAIRS = 200
DEFAULT_MAX_DIM = 720
DEFAULT_METRIC = "cosine"
DEFAULT_REFERENCE = "first_valid"
DEFAULT_SEED = 0
DEFAULT_OUTPUT_DIR = "fcb-out"
DEFAULT_MODELS = ("toy",)


class ManifestError(ValueError):
    """Malformed manifest; message carries the manifest path and key context."""


@dataclass(frozen=True)
class Mode1Config:
    kind: str = "first_valid"  # "first_valid" | "index" | "medoid"
    index: int | None = None

    def __post_init__(self):
        if self.kind not in ("first_valid", "index", "medoid"):
            raise ValueError(f"unknown mode1 reference kind {self.kind!r}")
        if self.kind == "index" and (self.index is None or self.index < 0):
            raise ValueError("index reference requires a non-negative frame index")

    @classmethod
    def parse(cls, text: str) -> "Mode1Config":
        if text in ("first_valid", "medoid"):
            return cls(kind=text)
        if text.startswith("index:"):
            try:
                return cls(kind="index", index=int(text.split(":", 1)[1]))
            except ValueError:
                pass
        raise ValueError(
            f"invalid mode1 reference {text!r}; expected first_valid, index:<k> or medoid"
        )

    def as_text(self) -> str:
        return f"index:{self.index}" if self.kind == "index" else self.kind


@dataclass(frozen=True)
class Mode2Config:
    num_pairs: int = DEFAULT_NUM_PAIRS

    def __post_init__(self):
        if self.num_pairs < 1:
            raise ValueError(f"mode2 num_pairs must be >= 1, got {self.num_pairs}")


@dataclass(frozen=True)
class SourceGroup:
    name: str
    kind: str  # "real" | "generated"
    videos: tuple[Path, ...]


@dataclass(frozen=True)
class Manifest:
    sources: tuple[SourceGroup, ...]
    models: tuple[str, ...] = DEFAULT_MODELS
    metric: str = DEFAULT_METRIC
    mode1: Mode1Config = field(default_factory=Mode1Config)
    mode2: Mode2Config = field(default_factory=Mode2Config)
    max_dim: int = DEFAULT_MAX_DIM
    seed: int = DEFAULT_SEED
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)

    def video_ids(self) -> list[tuple[str, str, Path]]:
        """(video_id, source_name, path) triples in manifest order."""
        out = []
        for source in self.sources:
            for video in source.videos:
                out.append((f"{source.name}/{video.name}", source.name, video))
        return out

    def source(self, name: str) -> SourceGroup:
        for group in self.sources:
            if group.name == name:
                return group
        raise KeyError(name)


def _reject_unknown(raw: dict, allowed: set[str], where: str, path: Path):
    unknown = set(raw) - allowed
    if unknown:
        raise ManifestError(
            f"{path}: unknown key(s) {sorted(unknown)} in {where}; allowed: {sorted(allowed)}"
        )


def _parse_source(raw, position: int, base: Path, path: Path) -> SourceGroup:
    where = f"sources[{position}]"
    if not isinstance(raw, dict):
        raise ManifestError(f"{path}: {where} must be a mapping with name/kind/videos")
    _reject_unknown(raw, {"name", "kind", "videos"}, where, path)
    try:
        name = str(raw["name"])
        kind = str(raw["kind"])
        videos = raw["videos"]
    except KeyError as exc:
        raise ManifestError(f"{path}: {where} is missing required key {exc}") from None
    if kind not in SOURCE_KINDS:
        raise ManifestError(f"{path}: {where} kind must be one of {SOURCE_KINDS}, got {kind!r}")
    if not isinstance(videos, list) or not videos:
        raise ManifestError(f"{path}: {where} needs a non-empty list of video paths")
    resolved = []
    for v in videos:
        video_path = (base / str(v)).resolve() if not Path(str(v)).is_absolute() else Path(str(v))
        if not video_path.exists():
            raise ManifestError(f"{path}: {where} video does not exist: {video_path}")
        resolved.append(video_path)
    return SourceGroup(name=name, kind=kind, videos=tuple(resolved))


def load_manifest(path: str | Path) -> Manifest:
    """Parse and validate; defaults filled, explicit values never overridden."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ManifestError(f"{path}: parse failure: {exc}") from exc
    if not isinstance(raw, dict):
        raise ManifestError(f"{path}: manifest must be a mapping of run settings")

    allowed = {"sources", "models", "metric", "mode1", "mode2", "max_dim", "seed", "output_dir"}
    _reject_unknown(raw, allowed, "manifest", path)

    sources_raw = raw.get("sources")
    if not isinstance(sources_raw, list) or not sources_raw:
        raise ManifestError(f"{path}: manifest needs at least one source")
    sources = [_parse_source(s, i, path.parent, path) for i, s in enumerate(sources_raw)]

    names = [s.name for s in sources]
    for name in names:
        if names.count(name) > 1:
            raise ManifestError(f"{path}: duplicate source name {name!r}")

    seen_video_ids = set()
    for source in sources:
        for video in source.videos:
            vid = f"{source.name}/{video.name}"
            if vid in seen_video_ids:
                raise ManifestError(
                    f"{path}: two videos in source {source.name!r} share the file name "
                    f"{video.name!r}; video ids must be unique"
                )
            seen_video_ids.add(vid)

    models_raw = raw.get("models", list(DEFAULT_MODELS))
    if not isinstance(models_raw, list) or not models_raw:
        raise ManifestError(f"{path}: models must be a non-empty list of model ids")
    models = [str(m) for m in models_raw]
    for m in models:
        if models.count(m) > 1:
            raise ManifestError(f"{path}: duplicate model id {m!r}")

    metric = str(raw.get("metric", DEFAULT_METRIC))
    if metric not in METRICS:
        raise ManifestError(f"{path}: metric must be one of {METRICS}, got {metric!r}")

    mode1_raw = raw.get("mode1", {})
    if not isinstance(mode1_raw, dict):
        raise ManifestError(f"{path}: mode1 must be a mapping")
    _reject_unknown(mode1_raw, {"reference"}, "mode1", path)
    try:
        mode1 = Mode1Config.parse(str(mode1_raw.get("reference", DEFAULT_REFERENCE)))
    except ValueError as exc:
        raise ManifestError(f"{path}: {exc}") from None

    mode2_raw = raw.get("mode2", {})
    if not isinstance(mode2_raw, dict):
        raise ManifestError(f"{path}: mode2 must be a mapping")
    _reject_unknown(mode2_raw, {"num_pairs"}, "mode2", path)
    try:
        mode2 = Mode2Config(num_pairs=int(mode2_raw.get("num_pairs", DEFAULT_NUM_PAIRS)))
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"{path}: mode2.num_pairs: {exc}") from None

    try:
        max_dim = int(raw.get("max_dim", DEFAULT_MAX_DIM))
        if max_dim < 1:
            raise ValueError(f"max_dim must be >= 1, got {max_dim}")
        seed = check_seed(raw.get("seed", DEFAULT_SEED))
        check_metric(metric)
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"{path}: {exc}") from None

    output_dir = Path(str(raw.get("output_dir", DEFAULT_OUTPUT_DIR)))
    if not output_dir.is_absolute():
        output_dir = path.parent / output_dir

    return Manifest(
        sources=tuple(sources),
        models=tuple(models),
        metric=metric,
        mode1=mode1,
        mode2=mode2,
        max_dim=max_dim,
        seed=seed,
        output_dir=output_dir,
    )


def manifest_to_dict(m: Manifest) -> dict:
    return {
        "sources": [
            {"name": s.name, "kind": s.kind, "videos": [str(v) for v in s.videos]}
            for s in m.sources
        ],
        "models": list(m.models),
        "metric": m.metric,
        "mode1": {"reference": m.mode1.as_text()},
        "mode2": {"num_pairs": m.mode2.num_pairs},
        "max_dim": m.max_dim,
        "seed": m.seed,
        "output_dir": str(m.output_dir),
    }


def save_manifest(m: Manifest, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(yaml.safe_dump(manifest_to_dict(m), sort_keys=False), encoding="utf-8")
    return path


def validate_against_registry(m: Manifest, registry: ModelRegistry) -> list[ModelSpec]:
    """Resolve every manifest model id; fails fast before any decoding starts."""
    seen = set()
    specs = []
    for model_id in m.models:
        if model_id in seen:
            raise ManifestError(f"duplicate model id {model_id!r}")
        seen.add(model_id)
        specs.append(registry.get(model_id))
    return specs
