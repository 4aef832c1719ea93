"""Estimator-style wrappers over the functional pipeline.

Both classes follow the scikit-learn contract: constructor stores
hyperparameters verbatim, ``fit`` validates them and returns ``self``,
``get_params``/``set_params`` work for cloning and grid search. Neither
learns anything from data; fitting exists so misconfiguration fails
where scikit-learn tooling expects it to.

    extractor = FaceEmbeddingExtractor(model="toy").fit()
    sets = extractor.transform(["clips/a.mp4", "frames/b"])
    scorer = ConsistencyScorer(mode="mode2", num_pairs=200, seed=7).fit()
    stats = scorer.transform(sets)   # columns: mean, std
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .embed import EmbeddingSet
from .facegate import DEFAULT_ALIGNMENT_TEMPLATE, make_detector
from .manifest import Mode1Config, Mode2Config
from .pipeline import ExtractConfig, _process_video, _VideoJob, detector_fingerprint, extraction_params
from .cache import hash_params
from .consistency import ConsistencyScore, score_mode1, score_mode2, select_reference
from .registry import ModelRegistry
from .validation import check_metric, check_mode, check_seed


class FaceEmbeddingExtractor(BaseEstimator, TransformerMixin):
    """Videos in, per-video embedding sets out.

    Parameters mirror the CLI: one model id resolved against a registry,
    a detector spec string, the resolution cap, frame stride and an
    optional cache directory.
    """

    def __init__(
        self,
        model: str = "toy",
        detector: str = "full_frame",
        max_dim: int = 720,
        stride: int = 1,
        cache_dir: str | None = None,
        registry: ModelRegistry | None = None,
    ):
        self.model = model
        self.detector = detector
        self.max_dim = max_dim
        self.stride = stride
        self.cache_dir = cache_dir
        self.registry = registry

    def fit(self, X=None, y=None):
        registry = self.registry if self.registry is not None else ModelRegistry.builtin()
        self.spec_ = registry.get(self.model)
        self.template_ = registry.alignment_template or DEFAULT_ALIGNMENT_TEMPLATE
        self.config_ = ExtractConfig(
            detector=self.detector,
            max_dim=self.max_dim,
            stride=self.stride,
            cache_dir=None if self.cache_dir is None else Path(self.cache_dir),
        )
        make_detector(self.detector)  # fail here, not per video
        return self

    def transform(self, X) -> list[EmbeddingSet]:
        """X: iterable of video paths (files or frame folders)."""
        check_is_fitted(self, "spec_")
        detector_sig = detector_fingerprint(make_detector(self.detector))
        param_hash = hash_params(
            extraction_params(
                self.spec_,
                max_dim=self.max_dim,
                stride=self.stride,
                detector_sig=detector_sig,
                template=self.template_,
            )
        )
        out = []
        for item in X:
            path = Path(item)
            job = _VideoJob(video_id=path.name, source="", path=path)
            result = _process_video(
                job, [self.spec_], self.config_, self.template_, {self.spec_.id: param_hash}
            )
            if result.error is not None:
                raise RuntimeError(f"{path}: {result.error}")
            out.append(result.sets[self.spec_.id])
        return out


class ConsistencyScorer(BaseEstimator, TransformerMixin):
    """Embedding sets in, consistency statistics out.

    ``transform`` returns an (n_videos, 2) array of (mean, std);
    ``score_videos`` returns the full per-video records.
    """

    def __init__(
        self,
        mode: str = "mode1",
        metric: str = "cosine",
        reference: str = "first_valid",
        num_pairs: int = 200,
        seed: int = 0,
        include_self: bool = False,
    ):
        self.mode = mode
        self.metric = metric
        self.reference = reference
        self.num_pairs = num_pairs
        self.seed = seed
        self.include_self = include_self

    def fit(self, X=None, y=None):
        check_mode(self.mode)
        check_metric(self.metric)
        check_seed(self.seed)
        self.mode1_ = Mode1Config.parse(self.reference)
        self.mode2_ = Mode2Config(num_pairs=self.num_pairs)
        return self

    def score_videos(self, X) -> list[ConsistencyScore]:
        check_is_fitted(self, "mode1_")
        scores = []
        for embedding_set in X:
            if self.mode == "mode1":
                ref = select_reference(embedding_set, self.mode1_, self.metric)
                scores.append(
                    score_mode1(
                        embedding_set, ref, metric=self.metric, include_self=self.include_self
                    )
                )
            else:
                scores.append(
                    score_mode2(embedding_set, self.mode2_, self.seed, metric=self.metric)
                )
        return scores

    def transform(self, X) -> np.ndarray:
        scores = self.score_videos(X)
        return np.asarray([[s.mean, s.std] for s in scores], dtype=np.float64)

    def predict(self, X) -> np.ndarray:
        return self.transform(X)[:, 0]
