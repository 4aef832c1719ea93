import json

import numpy as np
import pytest
from skimage.transform import SimilarityTransform

from fcbench.facegate import (
    ALIGNMENT_TEMPLATE_SIZE,
    DEFAULT_ALIGNMENT_TEMPLATE,
    Candidate,
    DetectorError,
    FullFrameDetector,
    StubDetector,
    align_and_crop,
    detect_primary_face,
    make_detector,
    scaled_template,
    select_primary,
    solve_similarity,
)
from fcbench.frameio import FrameRecord


def frame_of(width=64, height=48, value=100, index=0) -> FrameRecord:
    return FrameRecord(
        frame_index=index,
        timestamp=0.0,
        image=np.full((height, width, 3), value, dtype=np.uint8),
    )


class TestSelectPrimary:
    def test_largest_area_wins(self):
        small = Candidate(bbox=(0, 0, 10, 10), confidence=0.9)
        big = Candidate(bbox=(20, 20, 30, 30), confidence=0.7)
        assert select_primary([small, big]) is big

    def test_threshold_filters_before_area(self):
        big_weak = Candidate(bbox=(0, 0, 30, 30), confidence=0.3)
        small_strong = Candidate(bbox=(0, 0, 10, 10), confidence=0.9)
        assert select_primary([big_weak, small_strong], threshold=0.5) is small_strong

    def test_tie_breaks_on_top_then_left(self):
        lower = Candidate(bbox=(0, 10, 10, 10), confidence=1.0)
        upper_right = Candidate(bbox=(5, 0, 10, 10), confidence=1.0)
        upper_left = Candidate(bbox=(2, 0, 10, 10), confidence=1.0)
        assert select_primary([lower, upper_right, upper_left]) is upper_left

    def test_empty_returns_none(self):
        assert select_primary([]) is None
        assert select_primary([Candidate(bbox=(0, 0, 5, 5), confidence=0.1)], 0.5) is None


class TestDetectPrimaryFace:
    def test_full_frame_detector_covers_frame(self):
        frame = frame_of(64, 48)
        obs = detect_primary_face(frame, FullFrameDetector())
        assert obs is not None
        assert obs.bbox == (0.0, 0.0, 64.0, 48.0)
        assert obs.confidence == 1.0

    def test_bbox_clipped_to_frame(self):
        frame = frame_of(64, 48)

        class Overhang:
            def detect(self, frame):
                return [Candidate(bbox=(-10.0, -10.0, 40.0, 40.0), confidence=1.0)]

        obs = detect_primary_face(frame, Overhang())
        assert obs.bbox == (0.0, 0.0, 30.0, 30.0)

    def test_sliver_after_clipping_is_no_face(self):
        frame = frame_of(64, 48)

        class Sliver:
            def detect(self, frame):
                return [Candidate(bbox=(60.0, 0.0, 40.0, 40.0), confidence=1.0)]

        assert detect_primary_face(frame, Sliver()) is None  # 4px wide after clip


class TestStubDetector:
    def script(self, tmp_path, payload) -> str:
        path = tmp_path / "script.json"
        path.write_text(json.dumps(payload))
        return str(path)

    def test_per_frame_entries_and_default(self, tmp_path):
        path = self.script(
            tmp_path,
            {
                "frames": {
                    "0": [{"bbox": [1, 2, 20, 20], "confidence": 0.9}],
                    "1": "none",
                },
                "default": [{"bbox": [0, 0, 10, 10], "confidence": 0.5}],
            },
        )
        detector = StubDetector(path)
        assert detector.detect(frame_of(index=0))[0].bbox == (1.0, 2.0, 20.0, 20.0)
        assert detector.detect(frame_of(index=1)) == []
        assert detector.detect(frame_of(index=7))[0].confidence == 0.5

    def test_landmarks_parsed(self, tmp_path):
        points = [[10, 10], [20, 10], [15, 15], [11, 20], [19, 20]]
        path = self.script(
            tmp_path,
            {"frames": {"0": [{"bbox": [0, 0, 30, 30], "confidence": 1.0, "landmarks": points}]}},
        )
        got = StubDetector(path).detect(frame_of(index=0))[0].landmarks
        assert got.shape == (5, 2)
        np.testing.assert_array_equal(got, np.asarray(points, dtype=np.float64))

    def test_missing_script_is_fatal(self, tmp_path):
        with pytest.raises(DetectorError):
            StubDetector(tmp_path / "nope.json")


def test_make_detector_specs(tmp_path):
    assert isinstance(make_detector("full_frame"), FullFrameDetector)
    script = tmp_path / "s.json"
    script.write_text(json.dumps({"frames": {}}))
    assert isinstance(make_detector(f"stub:{script}"), StubDetector)
    with pytest.raises(ValueError):
        make_detector("magic")


class TestSolveSimilarity:
    def random_case(self, rng):
        src = rng.uniform(0, 100, size=(5, 2))
        angle = rng.uniform(-np.pi, np.pi)
        scale = rng.uniform(0.3, 3.0)
        translation = rng.uniform(-50, 50, size=2)
        rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        dst = scale * src @ rot.T + translation
        return src, dst

    def test_recovers_exact_similarity(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            src, dst = self.random_case(rng)
            matrix = solve_similarity(src, dst)
            mapped = src @ matrix[:, :2].T + matrix[:, 2]
            np.testing.assert_allclose(mapped, dst, atol=1e-8)

    def test_matches_reference_estimator_on_noisy_points(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            src, dst = self.random_case(rng)
            dst = dst + rng.normal(0, 1.5, size=dst.shape)  # noisy: least-squares fit
            ours = solve_similarity(src, dst)
            reference = SimilarityTransform()
            assert reference.estimate(src, dst)
            np.testing.assert_allclose(ours, reference.params[:2, :3], atol=1e-8)

    def test_degenerate_source_returns_none(self):
        src = np.full((5, 2), 7.0)
        dst = np.asarray(DEFAULT_ALIGNMENT_TEMPLATE)
        assert solve_similarity(src, dst) is None


def test_scaled_template_proportional():
    base = scaled_template((112, 112))
    np.testing.assert_allclose(base, np.asarray(DEFAULT_ALIGNMENT_TEMPLATE))
    half = scaled_template((56, 56))
    np.testing.assert_allclose(half, base / 2.0)
    assert ALIGNMENT_TEMPLATE_SIZE == 112.0


class TestAlignAndCrop:
    def face_frame(self):
        rng = np.random.default_rng(11)
        image = rng.integers(0, 255, size=(120, 160, 3), dtype=np.uint8)
        return FrameRecord(frame_index=0, timestamp=0.0, image=image)

    def observation(self, landmarks=None, bbox=(40.0, 20.0, 60.0, 80.0)):
        from fcbench.facegate import FaceObservation

        return FaceObservation(frame_index=0, bbox=bbox, confidence=1.0, landmarks=landmarks)

    def test_landmark_path_maps_points_onto_template(self):
        # landmarks that are an exact similarity image of the template
        template = scaled_template((112, 112))
        angle, scale, shift = 0.3, 0.8, np.array([30.0, 10.0])
        rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        landmarks = scale * template @ rot.T + shift
        obs = self.observation(landmarks=landmarks)
        out = align_and_crop(self.face_frame(), obs, (112, 112))
        assert out.crop.shape == (112, 112, 3)
        matrix = solve_similarity(landmarks, template)
        mapped = landmarks @ matrix[:, :2].T + matrix[:, 2]
        np.testing.assert_allclose(mapped, template, atol=1e-6)

    def test_bbox_fallback_without_landmarks(self):
        out = align_and_crop(self.face_frame(), self.observation(), (64, 64))
        assert out.crop.shape == (64, 64, 3)
        assert out.crop.dtype == np.uint8

    def test_degenerate_landmarks_fall_back_and_count(self):
        collapsed = np.full((5, 2), 50.0)
        warnings: dict = {}
        out = align_and_crop(
            self.face_frame(),
            self.observation(landmarks=collapsed),
            (64, 64),
            warning_counter=warnings,
        )
        assert out.crop.shape == (64, 64, 3)
        assert warnings["degenerate_landmarks"] == 1

    def test_bbox_crop_zero_pads_at_edges(self):
        frame = FrameRecord(
            frame_index=0,
            timestamp=0.0,
            image=np.full((50, 50, 3), 200, dtype=np.uint8),
        )
        # bbox hugging the corner; expanded square extends past the frame
        out = align_and_crop(frame, self.observation(bbox=(0.0, 0.0, 40.0, 40.0)), (48, 48))
        assert out.crop.shape == (48, 48, 3)
        assert out.crop.min() == 0  # padding visible
        assert out.crop.max() == 200

    def test_crop_matches_requested_size_exactly(self):
        for size in ((32, 32), (112, 112), (100, 50)):
            out = align_and_crop(self.face_frame(), self.observation(), size)
            assert out.crop.shape == (size[1], size[0], 3)
