import pytest

from fcbench.manifest import (
    Manifest,
    ManifestError,
    Mode1Config,
    Mode2Config,
    load_manifest,
    manifest_to_dict,
    save_manifest,
    validate_against_registry,
)
from fcbench.registry import ModelRegistry, RegistryError


def test_load_fills_defaults(write_manifest):
    path = write_manifest()
    m = load_manifest(path)
    assert m.models == ("toy",)
    assert m.metric == "cosine"
    assert m.mode1 == Mode1Config(kind="first_valid")
    assert m.mode2.num_pairs == 20
    assert m.max_dim == 720
    assert m.seed == 7


def test_load_minimal_manifest_defaults_everything(tmp_path, videos_dir):
    path = tmp_path / "m.yaml"
    path.write_text(
        "sources:\n"
        "  - name: only\n"
        "    kind: real\n"
        f"    videos: [{videos_dir / 'consistent_identity'}]\n"
    )
    m = load_manifest(path)
    assert m.models == ("toy",)
    assert m.mode2.num_pairs == 200
    assert m.seed == 0
    assert m.max_dim == 720


def test_video_paths_resolve_relative_to_manifest(tmp_path, videos_dir):
    (tmp_path / "clips").symlink_to(videos_dir)
    path = tmp_path / "m.yaml"
    path.write_text(
        "sources:\n  - name: s\n    kind: real\n    videos: [clips/consistent_identity]\n"
    )
    m = load_manifest(path)
    assert m.sources[0].videos[0].exists()
    assert m.sources[0].videos[0].name == "consistent_identity"


def test_unknown_top_level_key_rejected(write_manifest):
    path = write_manifest(metrics="oops")  # typo for "metric"
    with pytest.raises(ManifestError, match="unknown key"):
        load_manifest(path)


def test_unknown_source_key_rejected(write_manifest, videos_dir):
    path = write_manifest(
        sources=[
            {
                "name": "s",
                "kind": "real",
                "videos": [str(videos_dir / "consistent_identity")],
                "note": "nope",
            }
        ]
    )
    with pytest.raises(ManifestError, match=r"sources\[0\]"):
        load_manifest(path)


def test_missing_video_is_an_error(write_manifest):
    path = write_manifest(
        sources=[{"name": "s", "kind": "real", "videos": ["/no/such/clip.mp4"]}]
    )
    with pytest.raises(ManifestError, match="does not exist"):
        load_manifest(path)


def test_duplicate_source_name_rejected(write_manifest, videos_dir):
    clip = str(videos_dir / "consistent_identity")
    path = write_manifest(
        sources=[
            {"name": "s", "kind": "real", "videos": [clip]},
            {"name": "s", "kind": "generated", "videos": [clip]},
        ]
    )
    with pytest.raises(ManifestError, match="duplicate source name"):
        load_manifest(path)


def test_duplicate_model_rejected(write_manifest):
    path = write_manifest(models=["toy", "toy"])
    with pytest.raises(ManifestError, match="duplicate model id"):
        load_manifest(path)


def test_bad_metric_rejected(write_manifest):
    path = write_manifest(metric="manhattan")
    with pytest.raises(ManifestError, match="metric"):
        load_manifest(path)


def test_bad_seed_rejected(write_manifest):
    path = write_manifest(seed=-1)
    with pytest.raises(ManifestError, match="seed"):
        load_manifest(path)


def test_error_messages_carry_the_manifest_path(write_manifest):
    path = write_manifest(metric="manhattan")
    with pytest.raises(ManifestError, match=str(path)):
        load_manifest(path)


def test_mode1_reference_parsing():
    assert Mode1Config.parse("first_valid").kind == "first_valid"
    assert Mode1Config.parse("medoid").kind == "medoid"
    parsed = Mode1Config.parse("index:3")
    assert (parsed.kind, parsed.index) == ("index", 3)
    with pytest.raises(ValueError):
        Mode1Config.parse("index:x")
    with pytest.raises(ValueError):
        Mode1Config.parse("last")


def test_mode2_rejects_nonpositive_pairs():
    with pytest.raises(ValueError):
        Mode2Config(num_pairs=0)


def test_round_trip(write_manifest, tmp_path):
    m = load_manifest(write_manifest())
    saved = save_manifest(m, tmp_path / "again.yaml")
    assert load_manifest(saved) == m
    assert set(manifest_to_dict(m)) == {
        "sources",
        "models",
        "metric",
        "mode1",
        "mode2",
        "max_dim",
        "seed",
        "output_dir",
    }


def test_video_ids_are_source_scoped(write_manifest):
    m = load_manifest(write_manifest())
    ids = [vid for vid, _, _ in m.video_ids()]
    assert ids == ["steady/consistent_identity", "drifty/identity_switch"]


def test_validate_against_registry(write_manifest):
    m = load_manifest(write_manifest())
    specs = validate_against_registry(m, ModelRegistry.builtin())
    assert [s.id for s in specs] == ["toy"]


def test_validate_unknown_model_lists_available(write_manifest):
    m = load_manifest(write_manifest(models=["nope"]))
    with pytest.raises(RegistryError, match="toy"):
        validate_against_registry(m, ModelRegistry.builtin())
