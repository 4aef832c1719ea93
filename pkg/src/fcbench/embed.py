"""Face crop to embedding vector, via pluggable recognition backends.

Backends resolve from a ModelSpec:

* ``toy`` -- deterministic pixel statistic, no weights. Grayscale, 8x8
  area resize, flatten to 64 components in [0, 1], tiny epsilon on
  component 0 so the norm is never zero.
* ``onnx`` -- a portable inference graph executed on CPU through
  OpenCV's dnn module, with preprocessing constants from the registry.
* ``stub`` -- scripted per-frame vectors from a JSON fixture; lets tests
  force exact vectors and zero-norm drops without any model.

Vectors are stored at 32-bit float; distance accumulation upgrades to
64-bit in the scoring layer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import cv2
import numpy as np

from .facegate import FaceObservation
from .registry import ModelSpec


class InferenceError(RuntimeError):
    """Weights missing/corrupt or the backend failed to produce output."""


class ZeroNormEmbeddingError(RuntimeError):
    """Backend produced an all-zero vector; the frame is dropped, not fatal."""


@dataclass(frozen=True)
class Embedding:
    vector: np.ndarray  # (dim,) float32
    model_id: str
    frame_index: int


@dataclass(frozen=True)
class EmbeddingSet:
    """Ordered per-valid-frame embeddings for one video under one model."""

    video_id: str
    model_id: str
    embeddings: tuple[Embedding, ...]
    total_frames: int = 0
    skipped_frames: int = 0
    dropped_frames: int = 0

    def __post_init__(self):
        indices = [e.frame_index for e in self.embeddings]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("embeddings must be strictly ascending by frame_index")

    def __len__(self) -> int:
        return len(self.embeddings)

    @property
    def frame_indices(self) -> list[int]:
        return [e.frame_index for e in self.embeddings]

    def matrix(self) -> np.ndarray:
        """Stacked vectors, shape (n, dim), float32."""
        if not self.embeddings:
            return np.empty((0, 0), np.float32)
        return np.stack([e.vector for e in self.embeddings])


def toy_embed(crop: np.ndarray) -> np.ndarray:
    """The toy backend: gray, 8x8 area resize, [0, 1] scale, eps on comp 0."""
    gray = cv2.cvtColor(crop, cv2.COLOR_RGB2GRAY)
    small = cv2.resize(gray, (8, 8), interpolation=cv2.INTER_AREA)
    vec = (small.astype(np.float32) / np.float32(255.0)).reshape(-1)
    vec[0] += np.float32(1e-6)
    return vec


class _ToyBackend:
    def __init__(self, spec: ModelSpec):
        self.spec = spec

    def __call__(self, crop: np.ndarray) -> np.ndarray:
        return toy_embed(crop)


class _OnnxBackend:
    def __init__(self, spec: ModelSpec):
        self.spec = spec
        if spec.weights is None or not Path(spec.weights).is_file():
            raise InferenceError(f"model {spec.id!r}: weights not found: {spec.weights}")
        try:
            self._net = cv2.dnn.readNetFromONNX(str(spec.weights))
        except cv2.error as exc:
            raise InferenceError(f"model {spec.id!r}: cannot load {spec.weights}: {exc}") from exc

    def __call__(self, crop: np.ndarray) -> np.ndarray:
        pre = self.spec.preprocessing
        x = crop
        if pre.channel_order == "bgr":
            x = x[:, :, ::-1]
        x = x.astype(np.float32) * np.float32(pre.scale)
        x = (x - np.asarray(pre.mean, np.float32)) / np.asarray(pre.std, np.float32)
        if pre.layout == "nchw":
            blob = np.ascontiguousarray(x.transpose(2, 0, 1)[None])
        else:
            blob = np.ascontiguousarray(x[None])
        try:
            self._net.setInput(blob)
            out = self._net.forward()
        except cv2.error as exc:
            raise InferenceError(f"model {self.spec.id!r}: inference failed: {exc}") from exc
        vec = np.asarray(out, np.float32).reshape(-1)
        if vec.shape[0] != self.spec.embedding_dim:
            raise InferenceError(
                f"model {self.spec.id!r}: graph produced {vec.shape[0]} values, "
                f"registry declares {self.spec.embedding_dim}"
            )
        return vec


class _StubBackend:
    """Scripted vectors: {"dim": D, "vectors": {"<frame_index>": [..] | "zero"}, "default": ...}."""

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        try:
            raw = json.loads(Path(spec.weights).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise InferenceError(f"model {spec.id!r}: cannot load stub script: {exc}") from exc
        self._vectors = raw.get("vectors", {})
        self._default = raw.get("default")
        self._frame_index: int | None = None

    def set_frame(self, frame_index: int):
        self._frame_index = frame_index

    def __call__(self, crop: np.ndarray) -> np.ndarray:
        entry = self._vectors.get(str(self._frame_index), self._default)
        if entry is None:
            raise InferenceError(
                f"model {self.spec.id!r}: stub script has no vector for frame {self._frame_index}"
            )
        if entry == "zero":
            return np.zeros(self.spec.embedding_dim, np.float32)
        return np.asarray(entry, np.float32).reshape(-1)


def make_backend(spec: ModelSpec):
    """One backend instance per worker; instances are not shared across threads."""
    if spec.backend == "toy":
        return _ToyBackend(spec)
    if spec.backend == "onnx":
        return _OnnxBackend(spec)
    if spec.backend == "stub":
        return _StubBackend(spec)
    raise InferenceError(f"unknown backend {spec.backend!r} for model {spec.id!r}")


def embed_crop(crop: np.ndarray, spec: ModelSpec, backend=None) -> np.ndarray:
    """Embed one crop; raises ZeroNormEmbeddingError on an all-zero output."""
    cw, ch = int(crop.shape[1]), int(crop.shape[0])
    if (cw, ch) != tuple(spec.input_size):
        raise ValueError(
            f"crop size {cw}x{ch} does not match model {spec.id!r} "
            f"input size {spec.input_size[0]}x{spec.input_size[1]}"
        )
    vec = (backend or make_backend(spec))(crop)
    if not np.all(np.isfinite(vec)):
        raise InferenceError(f"model {spec.id!r}: non-finite embedding components")
    if not np.any(vec):
        raise ZeroNormEmbeddingError(f"model {spec.id!r}: zero-norm embedding")
    return vec


def embed_video(
    observations: Iterable[FaceObservation],
    spec: ModelSpec,
    video_id: str,
    *,
    total_frames: int = 0,
    skipped_frames: int = 0,
    backend=None,
    warning_counter: dict | None = None,
) -> EmbeddingSet:
    """Embed every observation; zero-norm outputs are dropped and counted.

    Observations must arrive ordered by frame_index. ``total_frames`` and
    ``skipped_frames`` come from the upstream gate and are recorded on
    the returned set next to the drop count.
    """
    backend = backend or make_backend(spec)
    embeddings: list[Embedding] = []
    dropped = 0
    for obs in observations:
        if obs.crop is None:
            raise ValueError(f"observation for frame {obs.frame_index} has no crop")
        if isinstance(backend, _StubBackend):
            backend.set_frame(obs.frame_index)
        try:
            vec = embed_crop(obs.crop, spec, backend=backend)
        except ZeroNormEmbeddingError:
            dropped += 1
            if warning_counter is not None:
                warning_counter["zero_norm_drops"] = warning_counter.get("zero_norm_drops", 0) + 1
            continue
        embeddings.append(Embedding(vector=vec, model_id=spec.id, frame_index=obs.frame_index))
    return EmbeddingSet(
        video_id=video_id,
        model_id=spec.id,
        embeddings=tuple(embeddings),
        total_frames=total_frames,
        skipped_frames=skipped_frames,
        dropped_frames=dropped,
    )
