"""Per-video consistency scoring: distance metrics, both comparison modes,
seeded pair sampling, and per-source aggregation.

Mode 1 compares every valid frame to one representative frame and
averages the distances; mode 2 averages the distances over a fixed
number of seeded random frame pairs (frames may repeat across pairs).
Lower scores mean a more consistent face. All distance accumulation
happens at 64-bit float regardless of embedding storage precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embed import Embedding, EmbeddingSet
from .rng import video_stream
from .validation import check_embedding_matrix, check_metric, check_seed, check_vector


class UnscorableVideoError(ValueError):
    """Fewer than two valid frames: the video is reported and excluded."""


@dataclass(frozen=True)
class ConsistencyScore:
    video_id: str
    model_id: str
    metric: str
    mode: str  # "mode1" | "mode2"
    mean: float
    std: float  # population std over the comparison set
    n_comparisons: int
    reference_index: int | None = None  # mode1 only


@dataclass(frozen=True)
class SourceAggregate:
    """Unweighted mean of per-video means for one (source, model, metric, mode)."""

    source_name: str
    model_id: str
    metric: str
    mode: str
    mean_of_video_means: float
    per_video: tuple[ConsistencyScore, ...]
    n_unscorable: int = 0


def _as_vector(v) -> np.ndarray:
    if isinstance(v, Embedding):
        v = v.vector
    return np.asarray(v, dtype=np.float64)


def distance(a, b, metric: str = "cosine") -> float:
    """Distance between two embeddings; symmetric, non-negative.

    cosine       1 - a.b / (|a| |b|), clamped to [0, 2]
    euclidean    |a - b|
    euclidean_l2 |a/|a| - b/|b||
    """
    check_metric(metric)
    va = check_vector(_as_vector(a), "a")
    vb = check_vector(_as_vector(b), "b")
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    if metric == "euclidean":
        return float(np.linalg.norm(va - vb))
    if metric == "euclidean_l2":
        return float(np.linalg.norm(va / np.linalg.norm(va) - vb / np.linalg.norm(vb)))
    value = 1.0 - float(np.dot(va, vb)) / (float(np.linalg.norm(va)) * float(np.linalg.norm(vb)))
    return min(max(value, 0.0), 2.0)


def distances_to_reference(matrix: np.ndarray, ref: np.ndarray, metric: str) -> np.ndarray:
    """Vectorized distance from every row of ``matrix`` to ``ref``."""
    check_metric(metric)
    if metric == "euclidean":
        return np.linalg.norm(matrix - ref, axis=1)
    if metric == "euclidean_l2":
        unit = matrix / np.linalg.norm(matrix, axis=1, keepdims=True)
        return np.linalg.norm(unit - ref / np.linalg.norm(ref), axis=1)
    cos = matrix @ ref / (np.linalg.norm(matrix, axis=1) * np.linalg.norm(ref))
    return np.clip(1.0 - cos, 0.0, 2.0)


def pair_distances(matrix: np.ndarray, pairs: list[tuple[int, int]], metric: str) -> np.ndarray:
    """Distances for explicit (i, j) row-position pairs."""
    check_metric(metric)
    idx_i = np.fromiter((p[0] for p in pairs), dtype=np.intp, count=len(pairs))
    idx_j = np.fromiter((p[1] for p in pairs), dtype=np.intp, count=len(pairs))
    a, b = matrix[idx_i], matrix[idx_j]
    if metric == "euclidean":
        return np.linalg.norm(a - b, axis=1)
    if metric == "euclidean_l2":
        ua = a / np.linalg.norm(a, axis=1, keepdims=True)
        ub = b / np.linalg.norm(b, axis=1, keepdims=True)
        return np.linalg.norm(ua - ub, axis=1)
    cos = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
    return np.clip(1.0 - cos, 0.0, 2.0)


def pairwise_distance_matrix(matrix: np.ndarray, metric: str) -> np.ndarray:
    """Full symmetric (n, n) distance matrix; zero diagonal."""
    n = matrix.shape[0]
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        out[i] = distances_to_reference(matrix, matrix[i], metric)
        out[i, i] = 0.0
    return out


def select_reference(embedding_set: EmbeddingSet, mode1_config, metric: str = "cosine") -> int:
    """Representative frame index per the mode-1 reference policy.

    ``first_valid``: lowest valid frame index. ``index(k)``: k if k is a
    valid frame, else an error. ``medoid``: the valid frame minimizing
    mean distance to all other valid frames, ties to the lowest index.
    """
    indices = embedding_set.frame_indices
    if not indices:
        raise UnscorableVideoError(f"video {embedding_set.video_id!r} has no valid frames")
    kind = mode1_config.kind
    if kind == "first_valid":
        return indices[0]
    if kind == "index":
        if mode1_config.index not in indices:
            raise ValueError(
                f"reference index {mode1_config.index} is not a valid frame of "
                f"video {embedding_set.video_id!r} (valid: {indices})"
            )
        return mode1_config.index
    if kind == "medoid":
        if len(indices) == 1:
            return indices[0]
        matrix = check_embedding_matrix(embedding_set.matrix())
        dist = pairwise_distance_matrix(matrix, check_metric(metric))
        mean_to_others = dist.sum(axis=1) / (len(indices) - 1)
        best = int(np.argmin(mean_to_others))  # argmin takes the first of ties
        return indices[best]
    raise ValueError(f"unknown reference kind {kind!r}")


def score_mode1(
    embedding_set: EmbeddingSet,
    reference_index: int,
    metric: str = "cosine",
    include_self: bool = False,
) -> ConsistencyScore:
    """Mean/std of distances from every valid frame to the reference frame.

    The reference's self-comparison is excluded by default (a guaranteed
    zero only deflates the mean); ``include_self`` keeps it for the other
    reading of "all frames".
    """
    check_metric(metric)
    indices = embedding_set.frame_indices
    if len(indices) < 2:
        raise UnscorableVideoError(
            f"video {embedding_set.video_id!r} has {len(indices)} valid frames; need >= 2"
        )
    if reference_index not in indices:
        raise ValueError(
            f"reference frame {reference_index} is not a valid frame of "
            f"video {embedding_set.video_id!r}"
        )
    matrix = check_embedding_matrix(embedding_set.matrix())
    ref_pos = indices.index(reference_index)
    dists = distances_to_reference(matrix, matrix[ref_pos], metric)
    if not include_self:
        dists = np.delete(dists, ref_pos)
    return ConsistencyScore(
        video_id=embedding_set.video_id,
        model_id=embedding_set.model_id,
        metric=metric,
        mode="mode1",
        mean=float(dists.mean()),
        std=float(dists.std()),
        n_comparisons=int(dists.size),
        reference_index=reference_index,
    )


def sample_pairs(n_valid: int, num_pairs: int, seed64: int, video_id: str) -> list[tuple[int, int]]:
    """Seeded random (i, j) position pairs, i != j, repetition across pairs allowed.

    Fully determined by (seed64, video_id): the per-video stream seed is
    splitmix64_mix(seed64 XOR fnv1a64(video_id)); i = next() mod n_valid
    and j is redrawn the same way until j != i.
    """
    if n_valid < 2:
        raise UnscorableVideoError(f"need at least 2 valid frames to sample pairs, got {n_valid}")
    if num_pairs < 1:
        raise ValueError(f"num_pairs must be >= 1, got {num_pairs}")
    stream = video_stream(check_seed(seed64), video_id)
    pairs: list[tuple[int, int]] = []
    for _ in range(num_pairs):
        i = stream.next_below(n_valid)
        j = stream.next_below(n_valid)
        while j == i:
            j = stream.next_below(n_valid)
        pairs.append((i, j))
    return pairs


def score_mode2(
    embedding_set: EmbeddingSet,
    mode2_config,
    seed64: int,
    metric: str = "cosine",
) -> ConsistencyScore:
    """Mean/std of distances over the seeded sample of random frame pairs."""
    check_metric(metric)
    num_pairs = mode2_config.num_pairs if hasattr(mode2_config, "num_pairs") else int(mode2_config)
    n_valid = len(embedding_set)
    if n_valid < 2:
        raise UnscorableVideoError(
            f"video {embedding_set.video_id!r} has {n_valid} valid frames; need >= 2"
        )
    matrix = check_embedding_matrix(embedding_set.matrix())
    pairs = sample_pairs(n_valid, num_pairs, seed64, embedding_set.video_id)
    dists = pair_distances(matrix, pairs, metric)
    return ConsistencyScore(
        video_id=embedding_set.video_id,
        model_id=embedding_set.model_id,
        metric=metric,
        mode="mode2",
        mean=float(dists.mean()),
        std=float(dists.std()),
        n_comparisons=num_pairs,
    )


def aggregate_source(
    source_name: str,
    scores: list[ConsistencyScore],
    n_unscorable: int = 0,
) -> SourceAggregate:
    """Unweighted arithmetic mean of per-video means for one source cell."""
    if not scores:
        raise UnscorableVideoError(f"source {source_name!r} has no scorable videos")
    models = {s.model_id for s in scores}
    metrics = {s.metric for s in scores}
    modes = {s.mode for s in scores}
    if len(models) != 1 or len(metrics) != 1 or len(modes) != 1:
        raise ValueError(
            "aggregate_source expects scores for exactly one (model, metric, mode); "
            f"got models={sorted(models)}, metrics={sorted(metrics)}, modes={sorted(modes)}"
        )
    means = np.array([s.mean for s in scores], dtype=np.float64)
    return SourceAggregate(
        source_name=source_name,
        model_id=scores[0].model_id,
        metric=scores[0].metric,
        mode=scores[0].mode,
        mean_of_video_means=float(means.mean()),
        per_video=tuple(scores),
        n_unscorable=n_unscorable,
    )
