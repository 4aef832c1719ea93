from pathlib import Path

import numpy as np
import pytest
import yaml

from fcbench.embed import Embedding, EmbeddingSet

FIXTURES = Path(__file__).resolve().parent / "fixtures"
VIDEOS = FIXTURES / "videos"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def videos_dir() -> Path:
    return VIDEOS


@pytest.fixture
def make_embedding_set():
    """Factory: vectors (n, d) array-like -> EmbeddingSet with sane counters."""

    def factory(
        vectors,
        video_id: str = "v",
        model_id: str = "toy",
        frame_indices=None,
        total_frames=None,
        skipped_frames: int = 0,
        dropped_frames: int = 0,
    ) -> EmbeddingSet:
        matrix = np.asarray(vectors, dtype=np.float32)
        indices = list(range(len(matrix))) if frame_indices is None else list(frame_indices)
        embeddings = tuple(
            Embedding(vector=row, model_id=model_id, frame_index=idx)
            for idx, row in zip(indices, matrix)
        )
        return EmbeddingSet(
            video_id=video_id,
            model_id=model_id,
            embeddings=embeddings,
            total_frames=len(matrix) + skipped_frames if total_frames is None else total_frames,
            skipped_frames=skipped_frames,
            dropped_frames=dropped_frames,
        )

    return factory


@pytest.fixture
def write_manifest(tmp_path):
    """Factory: write a manifest YAML into tmp_path, videos as absolute paths."""

    def factory(sources=None, filename: str = "manifest.yaml", **overrides) -> Path:
        if sources is None:
            sources = [
                {"name": "steady", "kind": "real", "videos": [str(VIDEOS / "consistent_identity")]},
                {"name": "drifty", "kind": "generated", "videos": [str(VIDEOS / "identity_switch")]},
            ]
        payload = {
            "sources": sources,
            "models": ["toy"],
            "metric": "cosine",
            "mode2": {"num_pairs": 20},
            "seed": 7,
            "output_dir": str(tmp_path / "out"),
        }
        payload.update(overrides)
        path = tmp_path / filename
        path.write_text(yaml.safe_dump(payload, sort_keys=False), encoding="utf-8")
        return path

    return factory


@pytest.fixture
def rgb_frame():
    """Factory: flat RGB frame of a given size and color."""

    def factory(height: int = 48, width: int = 48, color=(120, 90, 60)):
        img = np.zeros((height, width, 3), dtype=np.uint8)
        img[:] = color
        return img

    return factory
