import json

import pytest
from click.testing import CliRunner

from torusflux.cli import main
from torusflux.config import ConfigError, ExperimentConfig, apply_overrides, load_config

SMALL_CONFIG = """
[torus]
dim = 2
resolution = 16

[run]
steps = 50
seed = 3

[scenario]
pair_count = 2
cocycle_pairs = 2
sample_count = 8
sequence_length = 2
iterate_count = 3
"""


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def small_config(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL_CONFIG)
    return path


class TestConfig:
    def test_load_and_validate(self, small_config):
        cfg = load_config(small_config)
        assert cfg.resolution == 16
        assert cfg.pair_count == 2

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[torus]\nresolutionn = 32\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[grid]\nresolution = 32\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_invalid_values(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(resolution=7).validate()
        with pytest.raises(ConfigError):
            ExperimentConfig(steps=10).validate()

    def test_overrides(self):
        cfg = apply_overrides(ExperimentConfig(), resolution=32, seed=None)
        assert cfg.resolution == 32
        assert cfg.seed == 0


class TestScenarioCommand:
    def test_unknown_scenario_usage_error(self, runner, tmp_path):
        result = runner.invoke(
            main, ["scenario", "nonsense", "--out", str(tmp_path)]
        )
        assert result.exit_code == 2

    def test_missing_config_usage_error(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["verify", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path)],
        )
        assert result.exit_code == 2

    def test_scenario_runs_and_writes(self, runner, small_config, tmp_path):
        out = tmp_path / "reports"
        result = runner.invoke(
            main,
            ["scenario", "iteration-growth", "--config", str(small_config),
             "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert (out / "report.csv").exists()
        assert (out / "report.json").exists()
        assert (out / "growth.csv").exists()
        payload = json.loads((out / "report.json").read_text())
        assert payload["schema"] == 1
        assert payload["all_pass"] is True
        assert payload["config"]["resolution"] == 16

    def test_exit_one_on_failure(self, runner, small_config, tmp_path):
        # N = 16 is below the accuracy the exact-law check needs, so the
        # run completes but reports a failure
        out = tmp_path / "reports"
        result = runner.invoke(
            main,
            ["scenario", "defect-survey", "--config", str(small_config),
             "--out", str(out)],
        )
        assert result.exit_code == 1
        rows = (out / "report.csv").read_text().splitlines()
        assert rows[0].startswith("check_id,anchor,value")
        assert any(",false" in row for row in rows[1:])

    def test_seed_reproducibility(self, runner, small_config, tmp_path):
        outs = []
        for run in ("a", "b"):
            out = tmp_path / run
            result = runner.invoke(
                main,
                ["scenario", "defect-survey", "--config", str(small_config),
                 "--out", str(out)],
            )
            assert result.exit_code in (0, 1)
            outs.append((out / "report.csv").read_bytes()
                        + (out / "defects.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_seed_changes_tables(self, runner, small_config, tmp_path):
        blobs = []
        for seed in ("3", "4"):
            out = tmp_path / f"s{seed}"
            runner.invoke(
                main,
                ["scenario", "defect-survey", "--config", str(small_config),
                 "--out", str(out), "--seed", seed],
            )
            blobs.append((out / "defects.csv").read_bytes())
        assert blobs[0] != blobs[1]


class TestSaveLoad:
    def test_save_then_load(self, runner, tmp_path):
        path = tmp_path / "iso.npz"
        result = runner.invoke(
            main,
            ["save", str(path), "--family", "shear", "--resolution", "16",
             "--steps", "50"],
        )
        assert result.exit_code == 0, result.output
        result = runner.invoke(main, ["load", str(path)])
        assert result.exit_code == 0
        assert "N=16" in result.output

    def test_load_resampled(self, runner, tmp_path):
        path = tmp_path / "iso.npz"
        runner.invoke(
            main,
            ["save", str(path), "--family", "translation-loop",
             "--resolution", "16", "--steps", "50"],
        )
        result = runner.invoke(main, ["load", str(path), "--resolution", "32"])
        assert result.exit_code == 0
        assert "N=32" in result.output

    def test_load_corrupt_exits_two(self, runner, tmp_path):
        path = tmp_path / "junk.npz"
        path.write_bytes(b"garbage")
        result = runner.invoke(main, ["load", str(path)])
        assert result.exit_code == 2
