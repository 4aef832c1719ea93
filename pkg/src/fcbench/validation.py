"""Input validation helpers shared across the package.

Small check_* functions in the spirit of sklearn's ``check_array``:
validate, normalize dtype/shape, and raise ``ValueError`` with a usable
message. Scoring code assumes inputs that already passed these checks.
"""

from __future__ import annotations

import numpy as np

METRICS = ("cosine", "euclidean", "euclidean_l2")
MODES = ("mode1", "mode2")
SOURCE_KINDS = ("real", "generated")


def check_metric(name: str) -> str:
    if name not in METRICS:
        raise ValueError(f"unknown metric {name!r}; expected one of {METRICS}")
    return name


def check_mode(name: str) -> str:
    if name not in MODES:
        raise ValueError(f"unknown mode {name!r}; expected one of {MODES}")
    return name


def check_vector(v, name: str = "vector") -> np.ndarray:
    """Validate a single embedding vector: 1-D, finite, nonzero norm."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size < 2:
        raise ValueError(f"{name} must have at least 2 components")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite components")
    if not np.any(arr):
        raise ValueError(f"{name} has zero norm")
    return arr


def check_embedding_matrix(X, name: str = "embeddings") -> np.ndarray:
    """Validate a stack of embeddings: 2-D, finite, every row nonzero."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D (n_frames, dim), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    norms = np.linalg.norm(arr, axis=1)
    if np.any(norms == 0.0):
        bad = int(np.nonzero(norms == 0.0)[0][0])
        raise ValueError(f"{name} row {bad} has zero norm")
    return arr


def check_rgb_image(img, name: str = "image") -> np.ndarray:
    """Validate an 8-bit RGB raster of shape (H, W, 3)."""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"{name} must have shape (H, W, 3), got {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} has empty spatial dimensions: {arr.shape}")
    if arr.dtype != np.uint8:
        raise ValueError(f"{name} must be uint8, got {arr.dtype}")
    return arr


def check_seed(seed) -> int:
    """Validate an unsigned 64-bit run seed."""
    value = int(seed)
    if not 0 <= value < 2**64:
        raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    return value
