import filecmp
import json
from pathlib import Path

import pytest

from motionscale.cli import cli_dispatch


def dir_bytes(path: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(path.iterdir()) if p.is_file()}


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("ds") / "data"
    rc = cli_dispatch(["synth", "--pairs", "4", "--seed", "7", "--out", str(out),
                       "--frames", "8", "--height", "48", "--width", "64"])
    assert rc == 0
    return out


class TestSynthCommand:
    def test_deterministic_across_runs(self, tmp_path):
        args = ["synth", "--pairs", "3", "--seed", "9", "--frames", "8",
                "--height", "48", "--width", "64"]
        d1, d2 = tmp_path / "d1", tmp_path / "d2"
        assert cli_dispatch(args + ["--out", str(d1)]) == 0
        assert cli_dispatch(args + ["--out", str(d2)]) == 0
        assert dir_bytes(d1) == dir_bytes(d2)

    def test_manifest_fields(self, small_dataset):
        lines = (small_dataset / "manifest.jsonl").read_text().splitlines()
        assert len(lines) == 4
        rec = json.loads(lines[0])
        for key in ("pair_id", "clip_a_path", "clip_b_path", "annotation",
                    "ground_truth", "synth_spec"):
            assert key in rec


class TestUsageErrors:
    def test_no_subcommand_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli_dispatch([])
        assert exc.value.code == 2

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            cli_dispatch(["synth", "--bogus", "1", "--out", "x"])
        assert exc.value.code == 2

    def test_runtime_failure_exits_1(self, capsys):
        rc = cli_dispatch(["pseudo-label", "--manifest", "/nonexistent/m.jsonl"])
        assert rc == 1
        assert "error:" in capsys.readouterr().err


class TestConfigFile:
    def test_config_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "conf.txt"
        cfg.write_text("pairs = 2\nseed = 5\nheight = 48\nwidth=64  # comment\nframes=8\n")
        out = tmp_path / "out"
        rc = cli_dispatch(["synth", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        assert len((out / "manifest.jsonl").read_text().splitlines()) == 2

    def test_explicit_flag_beats_config(self, tmp_path):
        cfg = tmp_path / "conf.txt"
        cfg.write_text("pairs = 2\nheight = 48\nwidth = 64\nframes = 8\n")
        out = tmp_path / "out"
        rc = cli_dispatch(["synth", "--config", str(cfg), "--pairs", "1",
                           "--out", str(out)])
        assert rc == 0
        assert len((out / "manifest.jsonl").read_text().splitlines()) == 1

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "conf.txt"
        cfg.write_text("bogus = 1\n")
        rc = cli_dispatch(["synth", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == 1
        assert "unknown config keys" in capsys.readouterr().err


class TestScoringCommands:
    def test_pseudo_label_schema(self, small_dataset, tmp_path):
        out = tmp_path / "labels.jsonl"
        rc = cli_dispatch(["pseudo-label", "--manifest",
                           str(small_dataset / "manifest.jsonl"),
                           "--use-masks", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 8  # two clips per pair
        rec = json.loads(lines[0])
        assert set(rec) == {"clip_path", "object", "camera", "raw_object_px",
                            "raw_camera_px", "n_foreground_tracks"}
        assert 1.0 <= rec["object"] <= 10.0

    def test_ssim_score_same_schema(self, small_dataset, tmp_path):
        out = tmp_path / "scores.jsonl"
        rc = cli_dispatch(["score", "--manifest", str(small_dataset / "manifest.jsonl"),
                           "--method", "ssim", "--out", str(out)])
        assert rc == 0
        rec = json.loads(out.read_text().splitlines()[0])
        assert set(rec) == {"clip_path", "object", "camera", "raw_object_px",
                            "raw_camera_px", "n_foreground_tracks"}
        assert rec["object"] == rec["camera"]

    def test_eval_min_accuracy_gate(self, small_dataset, tmp_path, capsys):
        # The SSIM baseline cannot reach perfect accuracy on this data.
        rc = cli_dispatch(["eval", "--manifest", str(small_dataset / "manifest.jsonl"),
                           "--method", "ssim", "--min-accuracy", "1.01"])
        assert rc == 1

    def test_eval_report_written(self, small_dataset, tmp_path):
        report = tmp_path / "report.json"
        rc = cli_dispatch(["eval", "--manifest", str(small_dataset / "manifest.jsonl"),
                           "--method", "ssim", "--report", str(report)])
        assert rc == 0
        payload = json.loads(report.read_text())
        assert "object_accuracy" in payload
        assert "combined_accuracy" in payload


class TestExportAnnotations:
    def test_export_dedupes(self, tmp_path):
        log = tmp_path / "log.jsonl"
        rec = {"pair_id": "p1", "clip_a": "a", "clip_b": "b",
               "object_a_moving": 1, "object_b_moving": 1,
               "object_rel": 1, "camera_rel": 0}
        with open(log, "w") as fh:
            fh.write(json.dumps(rec) + "\n")
            rec2 = dict(rec, object_rel=2)
            fh.write(json.dumps(rec2) + "\n")
        out = tmp_path / "clean.jsonl"
        rc = cli_dispatch(["export-annotations", "--log", str(log), "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0])["object_rel"] == 2


class TestEmbedCommand:
    def test_embed_prints_vector(self, capsys):
        rc = cli_dispatch(["embed", "--object", "3", "--camera", "8", "--width", "32"])
        assert rc == 0
        vec = json.loads(capsys.readouterr().out)
        assert len(vec) == 32


class TestDataRootEnvVar:
    def test_env_var_resolves_relative_paths(self, small_dataset, tmp_path,
                                              monkeypatch, capsys):
        monkeypatch.setenv("MOTIONSCALE_DATA", str(small_dataset.parent))
        out = tmp_path / "scores.jsonl"
        rc = cli_dispatch(["score", "--manifest", f"{small_dataset.name}/manifest.jsonl",
                           "--method", "ssim", "--out", str(out)])
        assert rc == 0
        assert len(out.read_text().splitlines()) == 8
