"""Face detection gate and aligned crop extraction.

Every frame passes through a detector; frames without a detectable face
are skipped and excluded from all scoring. When several candidate faces
are found, the primary face is the largest box above the confidence
threshold (single-character videos, so largest is the subject), with
ties broken by the smaller (y, x) of the top-left corner.

Three detector backends:

* ``FullFrameDetector`` -- treats the whole frame as the face. Used by
  toy pipelines and frame-folder tests where no model is wanted.
* ``StubDetector`` -- replays per-frame scripted outputs from a JSON
  fixture file; drives gating and selection tests.
* ``YunetDetector`` -- a neural detector loaded from an ONNX file via
  OpenCV's FaceDetectorYN.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import cv2
import numpy as np

from .frameio import FrameRecord
from .validation import check_rgb_image

DEFAULT_DETECTOR_THRESHOLD = 0.6
BBOX_FALLBACK_MARGIN = 0.2
MIN_FACE_SIDE_PX = 8

# Canonical five-point template (two eyes, nose, two mouth corners) in
# 112x112 crop coordinates. Registry files may override it; this is the
# packaged default for registries that do not carry one.
DEFAULT_ALIGNMENT_TEMPLATE = (
    (38.2946, 51.6963),
    (73.5318, 51.5014),
    (56.0252, 71.7366),
    (41.5493, 92.3655),
    (70.7299, 92.2041),
)
ALIGNMENT_TEMPLATE_SIZE = 112.0


class DetectorError(RuntimeError):
    """Fatal detector failure (missing/corrupt model), distinct from "no face"."""


@dataclass(frozen=True)
class FaceObservation:
    """Primary face found in one frame; ``crop`` is filled by align_and_crop."""

    frame_index: int
    bbox: tuple[float, float, float, float]  # (x, y, w, h) in frame pixels
    confidence: float
    landmarks: np.ndarray | None = None  # (5, 2) in frame pixels
    crop: np.ndarray | None = None  # (h, w, 3) uint8 RGB at the model input size


@dataclass(frozen=True)
class Candidate:
    bbox: tuple[float, float, float, float]
    confidence: float
    landmarks: np.ndarray | None = None


class FullFrameDetector:
    """The entire frame is the face. Confidence 1.0, no landmarks."""

    name = "full_frame"

    def detect(self, frame: FrameRecord) -> list[Candidate]:
        return [Candidate(bbox=(0.0, 0.0, float(frame.width), float(frame.height)), confidence=1.0)]

    def signature(self) -> dict:
        return {"kind": "full_frame"}


class StubDetector:
    """Scripted detector: JSON maps frame_index -> candidate list or "none".

    Script format::

        {
          "frames": {
            "0": [{"bbox": [x, y, w, h], "confidence": 0.9,
                   "landmarks": [[x, y], ... 5 points]}],
            "1": "none"
          },
          "default": "none"
        }

    ``default`` applies to frame indices not listed; it may also be a
    candidate list.
    """

    name = "stub"

    def __init__(self, script_path: str | Path):
        self.script_path = Path(script_path)
        try:
            raw = json.loads(self.script_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DetectorError(f"cannot load stub detector script {self.script_path}: {exc}") from exc
        self._frames = raw.get("frames", {})
        self._default = raw.get("default", "none")

    @staticmethod
    def _parse(entry) -> list[Candidate]:
        if entry == "none" or entry is None:
            return []
        candidates = []
        for item in entry:
            landmarks = item.get("landmarks")
            candidates.append(
                Candidate(
                    bbox=tuple(float(v) for v in item["bbox"]),
                    confidence=float(item.get("confidence", 1.0)),
                    landmarks=None if landmarks is None else np.asarray(landmarks, dtype=np.float64),
                )
            )
        return candidates

    def detect(self, frame: FrameRecord) -> list[Candidate]:
        entry = self._frames.get(str(frame.frame_index), self._default)
        return self._parse(entry)

    def signature(self) -> dict:
        return {"kind": "stub", "script": str(self.script_path)}


class YunetDetector:
    """ONNX face detector (YuNet) through OpenCV; one instance per worker."""

    name = "neural"

    def __init__(self, model_path: str | Path, threshold: float = DEFAULT_DETECTOR_THRESHOLD):
        if not 0.0 < threshold < 1.0:
            raise ValueError(f"detector threshold must be in (0, 1), got {threshold}")
        self.model_path = Path(model_path)
        self.threshold = threshold
        if not self.model_path.is_file():
            raise DetectorError(f"detector model not found: {self.model_path}")
        try:
            self._net = cv2.FaceDetectorYN_create(
                str(self.model_path), "", (320, 320), score_threshold=threshold
            )
        except cv2.error as exc:
            raise DetectorError(f"cannot load detector model {self.model_path}: {exc}") from exc

    def detect(self, frame: FrameRecord) -> list[Candidate]:
        self._net.setInputSize((frame.width, frame.height))
        bgr = cv2.cvtColor(frame.image, cv2.COLOR_RGB2BGR)
        _, rows = self._net.detect(bgr)
        if rows is None:
            return []
        candidates = []
        for row in rows:
            x, y, w, h = (float(v) for v in row[:4])
            landmarks = np.asarray(row[4:14], dtype=np.float64).reshape(5, 2)
            candidates.append(Candidate(bbox=(x, y, w, h), confidence=float(row[14]), landmarks=landmarks))
        return candidates

    def signature(self) -> dict:
        return {"kind": "neural", "model": self.model_path.name, "threshold": self.threshold}


def make_detector(spec: str):
    """Build a detector from its CLI form.

    ``full_frame`` | ``stub:<script.json>`` | ``neural:<model.onnx>[:threshold]``
    """
    if spec == "full_frame":
        return FullFrameDetector()
    kind, _, rest = spec.partition(":")
    if kind == "stub" and rest:
        return StubDetector(rest)
    if kind == "neural" and rest:
        path, _, thr = rest.rpartition(":")
        if path and thr.replace(".", "", 1).isdigit():
            return YunetDetector(path, float(thr))
        return YunetDetector(rest)
    raise ValueError(
        f"unknown detector spec {spec!r}; expected full_frame, stub:<script.json> "
        "or neural:<model.onnx>[:threshold]"
    )


def _clip_bbox(bbox, frame: FrameRecord) -> tuple[float, float, float, float] | None:
    x, y, w, h = bbox
    x0, y0 = max(x, 0.0), max(y, 0.0)
    x1, y1 = min(x + w, float(frame.width)), min(y + h, float(frame.height))
    if x1 - x0 < MIN_FACE_SIDE_PX or y1 - y0 < MIN_FACE_SIDE_PX:
        return None
    return (x0, y0, x1 - x0, y1 - y0)


def select_primary(candidates: list[Candidate], threshold: float = 0.0) -> Candidate | None:
    """Largest bbox area above threshold; ties -> smaller (y, x) corner."""
    eligible = [c for c in candidates if c.confidence >= threshold]
    if not eligible:
        return None
    return min(eligible, key=lambda c: (-(c.bbox[2] * c.bbox[3]), c.bbox[1], c.bbox[0]))


def detect_primary_face(frame: FrameRecord, detector, threshold: float = 0.0) -> FaceObservation | None:
    """Run the detector and return the primary face, or None to skip the frame."""
    check_rgb_image(frame.image, "frame.image")
    best = select_primary(detector.detect(frame), threshold)
    if best is None:
        return None
    bbox = _clip_bbox(best.bbox, frame)
    if bbox is None:
        return None
    return FaceObservation(
        frame_index=frame.frame_index,
        bbox=bbox,
        confidence=best.confidence,
        landmarks=best.landmarks,
    )


def solve_similarity(src: np.ndarray, dst: np.ndarray) -> np.ndarray | None:
    """Least-squares similarity transform (scale, rotation, translation).

    Returns the 2x3 matrix mapping ``src`` points onto ``dst``, or None
    when the source constellation is degenerate (zero spread).
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    n = src.shape[0]
    mu_src = src.mean(axis=0)
    mu_dst = dst.mean(axis=0)
    src_c = src - mu_src
    dst_c = dst - mu_dst
    var_src = (src_c**2).sum() / n
    if var_src < 1e-12:
        return None
    cov = dst_c.T @ src_c / n
    u, s, vt = np.linalg.svd(cov)
    d = np.sign(np.linalg.det(u) * np.linalg.det(vt))
    sign = np.array([1.0, d])
    rotation = (u * sign) @ vt
    scale = (s * sign).sum() / var_src
    if not np.isfinite(scale) or scale <= 1e-12:
        return None
    matrix = np.empty((2, 3), dtype=np.float64)
    matrix[:, :2] = scale * rotation
    matrix[:, 2] = mu_dst - scale * rotation @ mu_src
    return matrix


def scaled_template(input_size: tuple[int, int], template=DEFAULT_ALIGNMENT_TEMPLATE) -> np.ndarray:
    """The five-point template scaled from its 112x112 frame to input_size."""
    pts = np.asarray(template, dtype=np.float64)
    w, h = input_size
    return pts * np.array([w / ALIGNMENT_TEMPLATE_SIZE, h / ALIGNMENT_TEMPLATE_SIZE])


def _landmarks_degenerate(landmarks: np.ndarray) -> bool:
    # zero inter-ocular distance collapses the similarity solve
    eye_dist = float(np.linalg.norm(landmarks[0] - landmarks[1]))
    return eye_dist < 2.0


def _bbox_square_crop(frame: FrameRecord, bbox, margin: float) -> np.ndarray:
    """Expanded square crop around the bbox, zero-padded at frame edges."""
    x, y, w, h = bbox
    side = (1.0 + margin) * max(w, h)
    cx, cy = x + w / 2.0, y + h / 2.0
    x0 = int(round(cx - side / 2.0))
    y0 = int(round(cy - side / 2.0))
    s = max(int(round(side)), 1)
    out = np.zeros((s, s, 3), dtype=np.uint8)
    fx0, fy0 = max(x0, 0), max(y0, 0)
    fx1, fy1 = min(x0 + s, frame.width), min(y0 + s, frame.height)
    if fx1 > fx0 and fy1 > fy0:
        out[fy0 - y0 : fy1 - y0, fx0 - x0 : fx1 - x0] = frame.image[fy0:fy1, fx0:fx1]
    return out


def align_and_crop(
    frame: FrameRecord,
    obs: FaceObservation,
    input_size: tuple[int, int],
    template=DEFAULT_ALIGNMENT_TEMPLATE,
    margin: float = BBOX_FALLBACK_MARGIN,
    warning_counter: dict | None = None,
) -> FaceObservation:
    """Fill ``obs.crop`` with an aligned face crop at exactly ``input_size``.

    With landmarks, a least-squares similarity transform maps the five
    points onto the canonical template scaled to the target size. Without
    landmarks (or when they are degenerate), the bbox is expanded by
    ``margin`` of max(w, h), square-padded and resized.
    """
    w, h = int(input_size[0]), int(input_size[1])
    if obs.landmarks is not None and not _landmarks_degenerate(obs.landmarks):
        matrix = solve_similarity(obs.landmarks, scaled_template((w, h), template))
        if matrix is not None:
            crop = cv2.warpAffine(frame.image, matrix, (w, h), borderValue=0)
            return replace(obs, crop=crop)
        if warning_counter is not None:
            warning_counter["degenerate_landmarks"] = warning_counter.get("degenerate_landmarks", 0) + 1
    elif obs.landmarks is not None and warning_counter is not None:
        warning_counter["degenerate_landmarks"] = warning_counter.get("degenerate_landmarks", 0) + 1
    square = _bbox_square_crop(frame, obs.bbox, margin)
    interpolation = cv2.INTER_AREA if square.shape[0] >= h else cv2.INTER_LINEAR
    crop = cv2.resize(square, (w, h), interpolation=interpolation)
    return replace(obs, crop=crop)
