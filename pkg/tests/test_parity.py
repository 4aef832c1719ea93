"""Cross-runtime parity for exported recognition models.

The export tooling (under ``modelport/``) emits three things into
``models/``: ONNX graph files, a registry data file describing them, and
parity fixtures holding reference embeddings computed by the exporter's
own forward pass. These tests load the artifacts exactly as a user would
and check that this package's inference agrees with the reference.

Fixture inputs are not stored as pixel dumps. Each case names a stream id;
the input image is regenerated here from the pinned splitmix64 stream
(one draw below 256 per channel, row major, RGB), so the fixtures also
pin the RNG contract across languages.
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from fcbench.embed import embed_crop
from fcbench.registry import load_registry
from fcbench.rng import video_stream

MODELS_DIR = Path(__file__).resolve().parent.parent / "models"
REGISTRY_FILE = MODELS_DIR / "registry.json"
FIXTURES_DIR = MODELS_DIR / "fixtures"

pytestmark = pytest.mark.skipif(
    not REGISTRY_FILE.is_file(),
    reason="no exported models: models/registry.json not present",
)


def exported_registry():
    return load_registry(REGISTRY_FILE)


def parity_cases():
    cases = []
    for fixture_file in sorted(FIXTURES_DIR.glob("*.json")):
        raw = json.loads(fixture_file.read_text(encoding="utf-8"))
        for case in raw["cases"]:
            cases.append((raw["model"], case["stream_id"], case["embedding"]))
    return cases


def generate_input(stream_id: str, width: int, height: int) -> np.ndarray:
    stream = video_stream(0, stream_id)
    flat = np.fromiter(
        (stream.next_below(256) for _ in range(width * height * 3)),
        dtype=np.uint8,
        count=width * height * 3,
    )
    return flat.reshape(height, width, 3)


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(a @ b) / (math.sqrt(float(a @ a)) * math.sqrt(float(b @ b)))


def test_registry_file_loads_unmodified():
    registry = exported_registry()
    raw = json.loads(REGISTRY_FILE.read_text(encoding="utf-8"))
    assert raw["models"], "exported registry lists no models"
    for entry in raw["models"]:
        spec = registry.get(entry["id"])
        assert spec.embedding_dim == entry["embedding_dim"]
        assert spec.weights is not None and spec.weights.is_file()


def test_declared_dimension_matches_graph_output():
    registry = exported_registry()
    raw = json.loads(REGISTRY_FILE.read_text(encoding="utf-8"))
    for entry in raw["models"]:
        spec = registry.get(entry["id"])
        crop = generate_input(f"dimcheck/{spec.id}", *spec.input_size)
        vec = embed_crop(crop, spec)  # raises if output size differs from the declared dim
        assert vec.shape == (spec.embedding_dim,)
        assert vec.dtype == np.float32


@pytest.mark.parametrize(
    "model_id,stream_id,expected",
    parity_cases() if REGISTRY_FILE.is_file() else [],
    ids=lambda v: v if isinstance(v, str) else "",
)
def test_inference_matches_reference_embeddings(model_id, stream_id, expected):
    registry = exported_registry()
    spec = registry.get(model_id)
    crop = generate_input(stream_id, *spec.input_size)
    vec = embed_crop(crop, spec)
    assert cosine_similarity(vec, expected) >= 0.999
