"""On-disk embedding cache so scoring reruns skip inference.

One file per (video, model, parameters). Byte layout, little-endian:

====================  =======================================================
magic                 4 bytes, ``b"FCBE"``
format version        uint32 (currently 1)
header length         uint32, length of the JSON header that follows
header                UTF-8 JSON: video_id, content_hash, model_id, dim,
                      param_hash, total_frames, skipped_frames,
                      dropped_frames, n_rows
rows                  n_rows x (uint32 frame_index + dim x float32)
====================  =======================================================

The cache key is (video content hash, model id, pipeline-parameter hash),
so any change to the video bytes, the model, or parameters like max_dim
is a miss, never a stale hit. Corrupt or version-mismatched entries are
treated as misses with a warning. Writes are atomic
(write-temp-then-rename), which keeps parallel workers safe.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embed import Embedding, EmbeddingSet
from .frameio import _frame_folder_files, is_frame_folder

logger = logging.getLogger(__name__)

MAGIC = b"FCBE"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class CacheKey:
    video_id: str
    model_id: str
    content_hash: str
    param_hash: str


def hash_video_content(path: str | Path) -> str:
    """SHA-256 of the video bytes; frame folders hash (name, bytes) per image."""
    path = Path(path)
    digest = hashlib.sha256()
    if is_frame_folder(path):
        for _, file in _frame_folder_files(path):
            digest.update(file.name.encode("utf-8"))
            digest.update(file.read_bytes())
    else:
        with path.open("rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                digest.update(chunk)
    return digest.hexdigest()


def hash_params(params: dict) -> str:
    """SHA-256 over a canonical JSON encoding of pipeline parameters."""
    encoded = json.dumps(params, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(encoded).hexdigest()


_UNSAFE = re.compile(r"[^A-Za-z0-9._-]")


def cache_path(cache_dir: str | Path, key: CacheKey) -> Path:
    safe_video = _UNSAFE.sub("_", key.video_id)
    safe_model = _UNSAFE.sub("_", key.model_id)
    return Path(cache_dir) / (
        f"{safe_video}__{safe_model}__{key.param_hash[:12]}{key.content_hash[:12]}.fcbe"
    )


def cache_store(embedding_set: EmbeddingSet, cache_dir: str | Path, key: CacheKey) -> Path:
    """Write atomically; returns the entry path."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    matrix = embedding_set.matrix().astype("<f4")
    dim = matrix.shape[1] if len(embedding_set) else 0
    header = json.dumps(
        {
            "video_id": key.video_id,
            "content_hash": key.content_hash,
            "model_id": key.model_id,
            "dim": dim,
            "param_hash": key.param_hash,
            "total_frames": embedding_set.total_frames,
            "skipped_frames": embedding_set.skipped_frames,
            "dropped_frames": embedding_set.dropped_frames,
            "n_rows": len(embedding_set),
        },
        sort_keys=True,
    ).encode("utf-8")

    target = cache_path(cache_dir, key)
    fd, tmp_name = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<II", FORMAT_VERSION, len(header)))
            fh.write(header)
            for row, emb in zip(matrix, embedding_set.embeddings):
                fh.write(struct.pack("<I", emb.frame_index))
                fh.write(row.tobytes())
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return target


def cache_load(cache_dir: str | Path, key: CacheKey) -> EmbeddingSet | None:
    """Load an entry, or None on miss/corruption/version mismatch."""
    path = cache_path(cache_dir, key)
    if not path.is_file():
        return None
    try:
        blob = path.read_bytes()
        if blob[:4] != MAGIC:
            raise ValueError("bad magic")
        version, header_len = struct.unpack_from("<II", blob, 4)
        if version != FORMAT_VERSION:
            logger.warning("cache entry %s has format version %d, treating as miss", path, version)
            return None
        header = json.loads(blob[12 : 12 + header_len].decode("utf-8"))
        for field_name, expected in (
            ("video_id", key.video_id),
            ("content_hash", key.content_hash),
            ("model_id", key.model_id),
            ("param_hash", key.param_hash),
        ):
            if header[field_name] != expected:
                raise ValueError(f"header field {field_name} does not match key")
        dim = int(header["dim"])
        n_rows = int(header["n_rows"])
        row_size = 4 + 4 * dim
        body = blob[12 + header_len :]
        if len(body) != n_rows * row_size:
            raise ValueError("truncated row data")
        embeddings = []
        for r in range(n_rows):
            offset = r * row_size
            (frame_index,) = struct.unpack_from("<I", body, offset)
            vec = np.frombuffer(body, dtype="<f4", count=dim, offset=offset + 4).copy()
            embeddings.append(Embedding(vector=vec, model_id=key.model_id, frame_index=frame_index))
        return EmbeddingSet(
            video_id=key.video_id,
            model_id=key.model_id,
            embeddings=tuple(embeddings),
            total_frames=int(header["total_frames"]),
            skipped_frames=int(header["skipped_frames"]),
            dropped_frames=int(header["dropped_frames"]),
        )
    except (ValueError, KeyError, json.JSONDecodeError, struct.error, UnicodeDecodeError) as exc:
        logger.warning("corrupt cache entry %s (%s), treating as miss", path, exc)
        return None
