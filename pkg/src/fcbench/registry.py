"""Model registry: the data file describing available recognition backends.

Embedding dimensions and preprocessing constants are properties of
third-party models, so they ship as data next to the weights instead of
being hard-coded. The registry file is emitted by the export tooling and
consumed verbatim here. The built-in registry contains only the ``toy``
backend, which needs no weights and keeps metric and pipeline tests
independent of any model file.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

REGISTRY_FORMAT = "fcb-registry/1"

BACKENDS = ("toy", "onnx", "stub")
CHANNEL_ORDERS = ("rgb", "bgr")
LAYOUTS = ("nchw", "nhwc")

MIN_NEURAL_INPUT = 16


class RegistryError(ValueError):
    """Malformed registry file or unresolvable model id."""


@dataclass(frozen=True)
class Preprocessing:
    """Pixel preprocessing applied before inference: x -> (x*scale - mean)/std."""

    scale: float = 1.0
    mean: tuple[float, float, float] = (0.0, 0.0, 0.0)
    std: tuple[float, float, float] = (1.0, 1.0, 1.0)
    channel_order: str = "rgb"
    layout: str = "nchw"

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "mean": list(self.mean),
            "std": list(self.std),
            "channel_order": self.channel_order,
            "layout": self.layout,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Preprocessing":
        pre = cls(
            scale=float(raw.get("scale", 1.0)),
            mean=tuple(float(v) for v in raw.get("mean", (0.0, 0.0, 0.0))),
            std=tuple(float(v) for v in raw.get("std", (1.0, 1.0, 1.0))),
            channel_order=str(raw.get("channel_order", "rgb")),
            layout=str(raw.get("layout", "nchw")),
        )
        if pre.channel_order not in CHANNEL_ORDERS:
            raise RegistryError(f"unknown channel_order {pre.channel_order!r}")
        if pre.layout not in LAYOUTS:
            raise RegistryError(f"unknown layout {pre.layout!r}")
        if len(pre.mean) != 3 or len(pre.std) != 3:
            raise RegistryError("preprocessing mean/std must have 3 components")
        if any(s == 0.0 for s in pre.std):
            raise RegistryError("preprocessing std components must be nonzero")
        return pre


@dataclass(frozen=True)
class ModelSpec:
    """One recognition backend: identity, geometry, preprocessing, weights."""

    id: str
    backend: str
    input_size: tuple[int, int]
    embedding_dim: int
    preprocessing: Preprocessing = field(default_factory=Preprocessing)
    weights: Path | None = None

    def validate(self) -> "ModelSpec":
        if self.backend not in BACKENDS:
            raise RegistryError(f"model {self.id!r}: unknown backend {self.backend!r}")
        if self.embedding_dim < 2:
            raise RegistryError(f"model {self.id!r}: embedding_dim must be >= 2")
        w, h = self.input_size
        if w < 1 or h < 1:
            raise RegistryError(f"model {self.id!r}: invalid input_size {self.input_size}")
        if self.backend == "onnx" and (w < MIN_NEURAL_INPUT or h < MIN_NEURAL_INPUT):
            raise RegistryError(
                f"model {self.id!r}: neural input_size must be >= "
                f"{MIN_NEURAL_INPUT}x{MIN_NEURAL_INPUT}, got {w}x{h}"
            )
        if self.backend in ("onnx", "stub") and self.weights is None:
            raise RegistryError(f"model {self.id!r}: backend {self.backend!r} requires weights")
        return self


TOY_SPEC = ModelSpec(
    id="toy",
    backend="toy",
    input_size=(32, 32),
    embedding_dim=64,
    preprocessing=Preprocessing(),
    weights=None,
)


class ModelRegistry:
    """Resolves model ids to specs; knows its own content hash for run metadata."""

    def __init__(self, specs: list[ModelSpec], alignment_template=None, content_hash: str = "builtin"):
        self._specs: dict[str, ModelSpec] = {}
        for spec in specs:
            if spec.id in self._specs:
                raise RegistryError(f"duplicate model id in registry: {spec.id!r}")
            self._specs[spec.id] = spec.validate()
        self.alignment_template = alignment_template
        self.content_hash = content_hash

    @classmethod
    def builtin(cls) -> "ModelRegistry":
        return cls([TOY_SPEC])

    @property
    def ids(self) -> list[str]:
        return sorted(self._specs)

    def __contains__(self, model_id: str) -> bool:
        return model_id in self._specs

    def get(self, model_id: str) -> ModelSpec:
        try:
            return self._specs[model_id]
        except KeyError:
            raise RegistryError(
                f"unknown model id {model_id!r}; available: {', '.join(self.ids)}"
            ) from None


def load_registry(path: str | Path) -> ModelRegistry:
    """Load a registry data file; the ``toy`` backend is always added.

    Weight paths in the file are resolved relative to the file's directory.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise RegistryError(f"cannot read registry file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise RegistryError(f"registry file {path} is not valid JSON: {exc}") from exc

    if raw.get("format") != REGISTRY_FORMAT:
        raise RegistryError(
            f"registry file {path} has format {raw.get('format')!r}, expected {REGISTRY_FORMAT!r}"
        )

    specs = []
    for entry in raw.get("models", []):
        try:
            weights = entry.get("weights")
            spec = ModelSpec(
                id=str(entry["id"]),
                backend=str(entry.get("backend", "onnx")),
                input_size=tuple(int(v) for v in entry["input_size"]),
                embedding_dim=int(entry["embedding_dim"]),
                preprocessing=Preprocessing.from_dict(entry.get("preprocessing", {})),
                weights=None if weights is None else (path.parent / weights),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise RegistryError(f"malformed model entry in {path}: {entry!r} ({exc})") from exc
        if spec.backend in ("onnx", "stub") and not spec.weights.is_file():
            raise RegistryError(f"model {spec.id!r}: weights file not found: {spec.weights}")
        specs.append(spec)

    if not any(s.id == TOY_SPEC.id for s in specs):
        specs.append(TOY_SPEC)

    template = raw.get("alignment_template")
    if template is not None:
        template = tuple(tuple(float(v) for v in pt) for pt in template)
        if len(template) != 5:
            raise RegistryError("alignment_template must contain exactly 5 points")

    content_hash = hashlib.sha256(path.read_bytes()).hexdigest()
    return ModelRegistry(specs, alignment_template=template, content_hash=content_hash)
