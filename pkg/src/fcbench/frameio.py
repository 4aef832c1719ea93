"""Video decoding and resolution normalization.

Two kinds of inputs are accepted:

* container files (mp4/webm/mkv/avi, anything OpenCV's FFmpeg build decodes);
* a directory of numerically-named image files, treated as a
  "frame-folder video" sorted ascending by numeric stem. Frame folders
  make model-free pipeline tests possible.

Frames are converted to 8-bit RGB at decode so every downstream stage
sees one canonical representation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import cv2
import numpy as np

from .validation import check_rgb_image


class VideoDecodeError(RuntimeError):
    """Raised for unreadable containers or videos with no decodable frames."""


@dataclass(frozen=True)
class FrameRecord:
    """One decoded frame: original decode index, presentation time, RGB pixels."""

    frame_index: int
    timestamp: float
    image: np.ndarray  # (H, W, 3) uint8, RGB

    @property
    def width(self) -> int:
        return int(self.image.shape[1])

    @property
    def height(self) -> int:
        return int(self.image.shape[0])


_NUMERIC_STEM = re.compile(r"^(\d+)$")
_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".pgm", ".tif", ".tiff", ".webp"}


def is_frame_folder(path: Path) -> bool:
    return Path(path).is_dir()


def _frame_folder_files(folder: Path) -> list[tuple[int, Path]]:
    entries = []
    for child in folder.iterdir():
        if not child.is_file() or child.suffix.lower() not in _IMAGE_SUFFIXES:
            continue
        m = _NUMERIC_STEM.match(child.stem)
        if m:
            entries.append((int(m.group(1)), child))
    entries.sort(key=lambda item: item[0])
    return entries


def _decode_frame_folder(folder: Path, stride: int) -> Iterator[FrameRecord]:
    entries = _frame_folder_files(folder)
    if not entries:
        raise VideoDecodeError(f"frame folder has no numerically-named images: {folder}")
    return _drain_frame_folder(entries, stride)


def _drain_frame_folder(entries: list[tuple[int, Path]], stride: int) -> Iterator[FrameRecord]:
    for position, (_, file) in enumerate(entries):
        if position % stride != 0:
            continue
        bgr = cv2.imread(str(file), cv2.IMREAD_COLOR)
        if bgr is None:
            raise VideoDecodeError(f"unreadable image in frame folder: {file}")
        rgb = cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)
        # frame folders carry no container timing; use the position in seconds
        yield FrameRecord(frame_index=position, timestamp=float(position), image=rgb)


def _decode_container(video: Path, stride: int) -> Iterator[FrameRecord]:
    cap = cv2.VideoCapture(str(video))
    if not cap.isOpened():
        cap.release()
        raise VideoDecodeError(f"cannot open video container: {video}")
    return _drain_container(cap, video, stride)


def _drain_container(cap: cv2.VideoCapture, video: Path, stride: int) -> Iterator[FrameRecord]:
    try:
        index = 0
        decoded_any = False
        while True:
            ok, bgr = cap.read()
            if not ok:
                break
            decoded_any = True
            if index % stride == 0:
                timestamp = max(cap.get(cv2.CAP_PROP_POS_MSEC), 0.0) / 1000.0
                yield FrameRecord(
                    frame_index=index,
                    timestamp=timestamp,
                    image=cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB),
                )
            index += 1
        if not decoded_any:
            raise VideoDecodeError(f"no decodable frames in {video}")
    finally:
        cap.release()


def decode_frames(video: str | Path, stride: int = 1) -> Iterator[FrameRecord]:
    """Yield every ``stride``-th frame in presentation order.

    ``frame_index`` is the original decode index, not renumbered, so
    downstream indices stay meaningful when subsampling.
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    path = Path(video)
    if not path.exists():
        raise VideoDecodeError(f"video path does not exist: {path}")
    if is_frame_folder(path):
        return _decode_frame_folder(path, stride)
    return _decode_container(path, stride)


def count_frames(video: str | Path, stride: int = 1) -> int:
    return sum(1 for _ in decode_frames(video, stride))


def normalize_resolution(frame: FrameRecord, max_dim: int = 720) -> FrameRecord:
    """Downscale so max(width, height) == max_dim, preserving aspect ratio.

    Frames already within the limit are returned unchanged; upscaling
    never happens. Downscale uses area-averaging resampling and
    round-to-nearest on the non-dominant side (minimum 1 px).
    """
    if max_dim < 1:
        raise ValueError(f"max_dim must be >= 1, got {max_dim}")
    check_rgb_image(frame.image, "frame.image")
    w, h = frame.width, frame.height
    longest = max(w, h)
    if longest <= max_dim:
        return frame
    scale = max_dim / longest
    new_w = max(int(round(w * scale)), 1)
    new_h = max(int(round(h * scale)), 1)
    resized = cv2.resize(frame.image, (new_w, new_h), interpolation=cv2.INTER_AREA)
    return FrameRecord(frame.frame_index, frame.timestamp, resized)
