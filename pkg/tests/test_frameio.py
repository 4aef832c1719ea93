from pathlib import Path

import cv2
import numpy as np
import pytest

from fcbench.frameio import (
    FrameRecord,
    VideoDecodeError,
    decode_frames,
    count_frames,
    is_frame_folder,
    normalize_resolution,
)


def write_folder(folder: Path, names: list[str], size=(32, 24)) -> Path:
    folder.mkdir(parents=True, exist_ok=True)
    for i, name in enumerate(names):
        img = np.full((size[1], size[0], 3), i * 10 % 255, dtype=np.uint8)
        assert cv2.imwrite(str(folder / name), img)
    return folder


def write_container(path: Path, n_frames: int = 8, size=(64, 48), fps: float = 10.0) -> Path:
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"mp4v"), fps, size)
    assert writer.isOpened()
    for i in range(n_frames):
        frame = np.full((size[1], size[0], 3), i * 20 % 255, dtype=np.uint8)
        frame[0, 0] = (i, 0, 0)
        writer.write(frame)
    writer.release()
    return path


def test_frame_folder_sorts_numerically(tmp_path):
    folder = write_folder(tmp_path / "clip", ["10.png", "2.png", "1.png"])
    frames = list(decode_frames(folder))
    assert [f.frame_index for f in frames] == [0, 1, 2]
    assert [f.timestamp for f in frames] == [0.0, 1.0, 2.0]
    # file "1.png" decodes first despite lexicographic order
    assert frames[0].image[0, 0, 0] == 20  # written as i=2 -> value 20


def test_frame_folder_ignores_non_numeric_stems(tmp_path):
    folder = write_folder(tmp_path / "clip", ["0.png", "1.png"])
    (folder / "preview.png").write_bytes((folder / "0.png").read_bytes())
    (folder / "notes.txt").write_text("not an image")
    assert count_frames(folder) == 2


def test_frame_folder_rgb_channel_order(tmp_path):
    folder = tmp_path / "clip"
    folder.mkdir()
    img = np.zeros((8, 8, 3), dtype=np.uint8)
    img[:, :, 0] = 255  # blue in BGR on disk
    cv2.imwrite(str(folder / "0.png"), img)
    frame = next(decode_frames(folder))
    assert frame.image[0, 0].tolist() == [0, 0, 255]  # red channel last in RGB


def test_stride_keeps_original_indices(tmp_path):
    folder = write_folder(tmp_path / "clip", [f"{i}.png" for i in range(7)])
    frames = list(decode_frames(folder, stride=3))
    assert [f.frame_index for f in frames] == [0, 3, 6]


def test_stride_must_be_positive(tmp_path):
    folder = write_folder(tmp_path / "clip", ["0.png"])
    with pytest.raises(ValueError):
        list(decode_frames(folder, stride=0))


def test_empty_folder_raises_before_iteration(tmp_path):
    folder = tmp_path / "empty"
    folder.mkdir()
    (folder / "notes.txt").write_text("no images here")
    with pytest.raises(VideoDecodeError):
        decode_frames(folder)


def test_missing_path_raises(tmp_path):
    with pytest.raises(VideoDecodeError):
        decode_frames(tmp_path / "nope.mp4")


def test_garbage_container_raises(tmp_path):
    path = tmp_path / "broken.mp4"
    path.write_bytes(b"this is not a video")
    with pytest.raises(VideoDecodeError):
        list(decode_frames(path))


def test_container_decode(tmp_path):
    path = write_container(tmp_path / "clip.mp4", n_frames=8)
    frames = list(decode_frames(path))
    assert len(frames) == 8
    assert [f.frame_index for f in frames] == list(range(8))
    assert all(f.image.shape == (48, 64, 3) for f in frames)
    stamps = [f.timestamp for f in frames]
    assert stamps == sorted(stamps)
    assert all(t >= 0.0 for t in stamps)


def test_container_stride(tmp_path):
    path = write_container(tmp_path / "clip.mp4", n_frames=8)
    frames = list(decode_frames(path, stride=2))
    assert [f.frame_index for f in frames] == [0, 2, 4, 6]


def test_is_frame_folder(tmp_path):
    folder = write_folder(tmp_path / "clip", ["0.png"])
    assert is_frame_folder(folder)
    assert not is_frame_folder(tmp_path / "clip" / "0.png")


class TestNormalizeResolution:
    def frame(self, width: int, height: int) -> FrameRecord:
        return FrameRecord(
            frame_index=0,
            timestamp=0.0,
            image=np.zeros((height, width, 3), dtype=np.uint8),
        )

    @pytest.mark.parametrize(
        "size_in,size_out",
        [
            ((1280, 720), (720, 405)),
            ((720, 1280), (405, 720)),
            ((2000, 2000), (720, 720)),
            ((640, 480), (640, 480)),  # under the cap: untouched
            ((720, 720), (720, 720)),  # exactly at the cap: untouched
        ],
    )
    def test_cap_at_720(self, size_in, size_out):
        out = normalize_resolution(self.frame(*size_in), max_dim=720)
        assert (out.width, out.height) == size_out

    def test_never_upscales(self):
        frame = self.frame(100, 60)
        out = normalize_resolution(frame, max_dim=720)
        assert out.image is frame.image

    def test_idempotent(self):
        once = normalize_resolution(self.frame(1280, 720), max_dim=720)
        twice = normalize_resolution(once, max_dim=720)
        assert (twice.width, twice.height) == (once.width, once.height)
        assert twice.image is once.image

    def test_preserves_index_and_timestamp(self):
        frame = FrameRecord(frame_index=5, timestamp=1.25, image=self.frame(1280, 720).image)
        out = normalize_resolution(frame, max_dim=720)
        assert (out.frame_index, out.timestamp) == (5, 1.25)

    def test_tiny_cap_never_reaches_zero(self):
        out = normalize_resolution(self.frame(2000, 10), max_dim=4)
        assert out.width == 4
        assert out.height >= 1
