"""Command line interface tests."""

import json

import pytest

from tonelab.cli import main
from tonelab.scales import load_scale


class TestConvert:
    def test_srgb_to_lab(self, capsys):
        assert main(["convert", "lab", "118", "118", "118"]) == 0
        out = capsys.readouterr().out
        assert "L*=49.637" in out

    def test_lab_to_srgb(self, capsys):
        assert main(["convert", "srgb", "50", "0", "0"]) == 0
        assert "#777777" in capsys.readouterr().out

    def test_ita(self, capsys):
        assert main(["convert", "ita", "70", "5", "20"]) == 0
        out = capsys.readouterr().out
        assert "ita=45" in out and "light" in out

    def test_polar(self, capsys):
        assert main(["convert", "polar", "60", "10", "10"]) == 0
        assert "hue=45" in capsys.readouterr().out


class TestBuildScale:
    def test_demo_corpus_scale(self, tmp_path, capsys):
        out = tmp_path / "cst.json"
        assert main(["build-scale", "--out", str(out)]) == 0
        scale = load_scale(out)
        assert scale.size == 10
        assert scale.swatches[0].lab.L_star == pytest.approx(70.0)

    def test_from_measurements(self, tmp_path, capsys):
        sim_dir = tmp_path / "sim"
        assert main(["simulate", "--study", "1", "--n", "80", "--seed", "3",
                     "--out", str(sim_dir)]) == 0
        out = tmp_path / "scale.json"
        assert main(["build-scale", "--measurements", str(sim_dir / "measurements.csv"),
                     "--site", "face", "--out", str(out)]) == 0
        assert load_scale(out).size == 10


class TestAnalyze:
    def test_simulate_then_analyze_study1(self, tmp_path, capsys):
        sim_dir = tmp_path / "sim"
        report_dir = tmp_path / "reports"
        assert main(["simulate", "--study", "1", "--n", "200", "--seed", "1",
                     "--out", str(sim_dir)]) == 0
        assert main([
            "analyze-study1",
            "--measurements", str(sim_dir / "measurements.csv"),
            "--demographics", str(sim_dir / "demographics.csv"),
            "--ratings", str(sim_dir / "ratings.jsonl"),
            "--race-reference", "White",
            "--location-reference", "MD",
            "--out", str(report_dir),
        ]) == 0
        assert (report_dir / "models.csv").exists()
        assert (report_dir / "models.txt").exists()
        out = capsys.readouterr().out
        assert "analyzed" in out

    def test_simulate_then_analyze_study2(self, tmp_path, capsys):
        sim_dir = tmp_path / "sim2"
        report_dir = tmp_path / "reports2"
        assert main(["simulate", "--study", "2", "--n", "150", "--seed", "2",
                     "--out", str(sim_dir)]) == 0
        assert main([
            "analyze-study2",
            "--subject-measurements", str(sim_dir / "subject_measurements.csv"),
            "--subject-demographics", str(sim_dir / "subject_demographics.csv"),
            "--rater-demographics", str(sim_dir / "rater_demographics.csv"),
            "--stimuli", str(sim_dir / "stimuli.csv"),
            "--ratings", str(sim_dir / "ratings.jsonl"),
            "--out", str(report_dir),
        ]) == 0
        assert (report_dir / "icc.csv").exists()
        assert (report_dir / "models.csv").exists()

    def test_simulate_writes_config_sidecar(self, tmp_path):
        sim_dir = tmp_path / "sim"
        main(["simulate", "--study", "1", "--n", "10", "--seed", "9",
              "--out", str(sim_dir)])
        sidecar = json.loads((sim_dir / "config.json").read_text())
        assert sidecar["study"] == 1

    def test_simulate_accepts_config_file(self, tmp_path):
        cfg = tmp_path / "sim.json"
        cfg.write_text(json.dumps({
            "n_raters": 25,
            "scales": {
                "cst": {"intercept": 5.0, "lightness": -0.2, "noise_sd": 0.5},
                "fst": {"intercept": 3.2, "lightness": -0.07, "noise_sd": 0.4},
            },
        }))
        sim_dir = tmp_path / "sim"
        assert main(["simulate", "--study", "1", "--config", str(cfg),
                     "--seed", "4", "--out", str(sim_dir)]) == 0
        from tonelab.simulate import load_ratings

        ratings = load_ratings(sim_dir / "ratings.jsonl")
        scales_seen = {r.scale_id for r in ratings if r.kind == "self"}
        assert scales_seen == {"cst", "fst"}
        assert len([r for r in ratings if r.kind == "self"]) == 50

    def test_simulate_config_rejects_unknown_keys(self, tmp_path):
        cfg = tmp_path / "sim.json"
        cfg.write_text(json.dumps({"n_raters": 5, "bogus": 1}))
        with pytest.raises(ValueError, match="bogus"):
            main(["simulate", "--study", "1", "--config", str(cfg),
                  "--seed", "1", "--out", str(tmp_path / "x")])

    def test_analyze_config_file_sets_references(self, tmp_path, capsys):
        sim_dir = tmp_path / "sim"
        main(["simulate", "--study", "1", "--n", "600", "--seed", "5",
              "--out", str(sim_dir)])
        cfg = tmp_path / "analysis.json"
        cfg.write_text(json.dumps({"race_reference": "White",
                                   "location_reference": "MD"}))
        report_dir = tmp_path / "reports"
        assert main([
            "analyze-study1",
            "--measurements", str(sim_dir / "measurements.csv"),
            "--demographics", str(sim_dir / "demographics.csv"),
            "--ratings", str(sim_dir / "ratings.jsonl"),
            "--config", str(cfg),
            "--out", str(report_dir),
        ]) == 0
        models = (report_dir / "models.csv").read_text()
        assert "race: Black" in models  # White is the reference now
        assert "race: White" not in models
