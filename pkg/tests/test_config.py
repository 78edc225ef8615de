import json

import pytest

from gksrom import ValidationError
from gksrom.config import (ExperimentConfig, RunManifest, config_from_dict,
                           config_hash, config_to_dict, load_config,
                           load_manifest, resolve_output_dir, write_manifest)


class TestDefaults:
    def test_defaults_match_reference_parameters(self):
        config = ExperimentConfig()
        assert config.num_points == 256
        assert config.length == 60.0
        assert config.dt == 0.001
        assert config.dt_snap == 0.5
        assert config.total_snapshots == 20000
        assert config.pod_threshold == 1e-2
        assert config.error_tol == 0.1
        assert config.ic_modes == 8
        assert config.study_modes == (3, 8, 22)
        assert config.num_ics == 3


class TestRoundTrip:
    def test_to_dict_from_dict_is_identity(self):
        config = ExperimentConfig(gamma=0.7, gammas=(0.0, 0.5),
                                  strategy="multi-parameter",
                                  total_snapshots=40, deim_dim=7)
        assert config_from_dict(config_to_dict(config)) == config

    def test_hash_is_stable_and_sensitive(self):
        a = ExperimentConfig()
        b = ExperimentConfig()
        c = ExperimentConfig(gamma=0.1)
        assert config_hash(a) == config_hash(b)
        assert config_hash(a) != config_hash(c)

    def test_json_file_round_trip(self, tmp_path):
        config = ExperimentConfig(gamma=2.0, total_time=5.0)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config_to_dict(config)))
        assert load_config(path) == config


class TestValidation:
    def test_unknown_field_reports_path(self):
        with pytest.raises(ValidationError, match="config.gammaa"):
            config_from_dict({"gammaa": 1.0})

    def test_type_error_reports_path(self):
        with pytest.raises(ValidationError, match="config.num_points"):
            config_from_dict({"num_points": "many"})

    def test_snapshot_clock_validated(self):
        with pytest.raises(ValidationError, match="config.dt_snap"):
            config_from_dict({"dt": 0.003, "dt_snap": 0.5})

    def test_negative_gamma_rejected(self):
        with pytest.raises(ValidationError, match="config.gamma"):
            config_from_dict({"gamma": -1.0})

    def test_tuple_field_element_errors_are_located(self):
        with pytest.raises(ValidationError, match=r"study_modes\[1\]"):
            config_from_dict({"study_modes": [3, "eight"]})


class TestOutputDir:
    def test_explicit_wins(self, monkeypatch):
        monkeypatch.setenv("GKSROM_OUTPUT_DIR", "/env")
        assert resolve_output_dir(ExperimentConfig(output_dir="/explicit")) == "/explicit"

    def test_env_fallback(self, monkeypatch):
        monkeypatch.setenv("GKSROM_OUTPUT_DIR", "/env")
        assert resolve_output_dir(ExperimentConfig()) == "/env"

    def test_cwd_default(self, monkeypatch):
        monkeypatch.delenv("GKSROM_OUTPUT_DIR", raising=False)
        assert resolve_output_dir(ExperimentConfig()) == "."


class TestManifest:
    def test_round_trip(self, tmp_path):
        manifest = RunManifest(command="simulate",
                               config=config_to_dict(ExperimentConfig()),
                               config_hash="abc", seeds=[1, 2],
                               outputs=[{"path": "x", "sha256": "d", "bytes": 3}],
                               timings={"integrate_s": 1.5}, version="0.1.0")
        path = tmp_path / "m.json"
        write_manifest(manifest, path)
        assert load_manifest(path) == manifest
