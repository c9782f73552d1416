"""Tests for configuration loading utility"""

import pytest
import yaml

from graphvq.core.config_loader import (
    ConfigNotFoundError,
    get_config_search_paths,
    list_available_configs,
    load_config,
    load_config_from_file,
    load_config_from_id,
)
from graphvq.models.experiment import ExperimentConfig

MINIMAL = {
    "id": "test-experiment",
    "name": "Test Experiment",
    "vocab_path": "vocab.gvc",
    "dataset_path": "seq",
    "methods": [{"method": "linear"}],
}


def _write(path, data):
    with open(path, "w") as f:
        yaml.dump(data, f)
    return path


@pytest.mark.unit
class TestLoadConfigFromFile:
    """Test loading config from YAML file"""

    def test_load_valid_yaml(self, tmp_path):
        """Test loading valid YAML configuration"""
        config = load_config_from_file(_write(tmp_path / "test.yaml", MINIMAL))

        assert isinstance(config, ExperimentConfig)
        assert config.id == "test-experiment"
        assert config.methods[0].method == "linear"
        assert config.feature_subsets == ["all", "matched"]

    def test_relative_paths_resolved(self, tmp_path):
        """Test data paths are resolved against the config file's directory"""
        config = load_config_from_file(_write(tmp_path / "test.yaml", MINIMAL))

        assert config.vocab_path == tmp_path / "vocab.gvc"
        assert config.dataset_path == tmp_path / "seq"

    def test_absolute_paths_kept(self, tmp_path):
        """Test absolute data paths are left alone"""
        data = dict(MINIMAL, vocab_path="/data/vocab.gvc")
        config = load_config_from_file(_write(tmp_path / "test.yaml", data))

        assert str(config.vocab_path) == "/data/vocab.gvc"

    def test_load_invalid_yaml(self, tmp_path):
        """Test loading invalid YAML raises error"""
        config_file = tmp_path / "invalid.yaml"
        config_file.write_text("invalid: yaml: content:")

        with pytest.raises(yaml.YAMLError):
            load_config_from_file(config_file)

    def test_load_nonexistent_file(self):
        """Test loading non-existent file raises error"""
        with pytest.raises(FileNotFoundError):
            load_config_from_file("/nonexistent/file.yaml")

    def test_unknown_method(self, tmp_path):
        """Test an unknown search method is a schema error"""
        data = dict(MINIMAL, methods=[{"method": "flann"}])

        with pytest.raises(ValueError, match="Invalid configuration"):
            load_config_from_file(_write(tmp_path / "bad.yaml", data))

    def test_two_vocabulary_sources(self, tmp_path):
        """Test vocab_path and synthetic_vocab are mutually exclusive"""
        data = dict(
            MINIMAL,
            synthetic_vocab={"training": {"count": 10}, "clusters": 4, "graph_k": 2},
        )

        with pytest.raises(ValueError):
            load_config_from_file(_write(tmp_path / "bad.yaml", data))

    def test_grid_for_unknown_parameter(self, tmp_path):
        """Test grids may only name parameters of their method"""
        data = dict(MINIMAL, grids={"linear": {"checks": [1, 2]}})

        with pytest.raises(ValueError):
            load_config_from_file(_write(tmp_path / "bad.yaml", data))

    def test_not_a_mapping(self, tmp_path):
        """Test a YAML list is not a configuration"""
        config_file = tmp_path / "list.yaml"
        config_file.write_text("- a\n- b\n")

        with pytest.raises(ValueError):
            load_config_from_file(config_file)


@pytest.mark.unit
class TestLoadConfigFromId:
    """Test loading config by ID"""

    def test_load_smoke_preset(self):
        """Test loading the smoke preset"""
        config = load_config_from_id("smoke")

        assert config.id == "smoke"
        assert config.synthetic_vocab.clusters == 200
        assert {s.method for s in config.methods} == {"linear", "kd", "hkm", "gnns", "sgnns"}
        assert config.target_accuracy == 0.9

    def test_load_city_center_preset(self):
        """Test the 87% preset calibrates its carry noise"""
        config = load_config_from_id("city-center-87")

        assert config.calibration is not None
        assert config.calibration.target == 0.64
        assert config.target_accuracy == 0.87
        assert config.sequence.features_per_frame == 316

    def test_load_large_vocab_preset(self):
        """Test the large-vocabulary preset calibrates against a reference vocabulary"""
        config = load_config_from_id("large-vocab")

        assert config.calibration.reference_vocab is not None
        assert config.synthetic_vocab.clusters > config.calibration.reference_vocab.clusters

    def test_load_nonexistent_config_id(self):
        """Test loading non-existent config ID"""
        with pytest.raises(ConfigNotFoundError) as exc_info:
            load_config_from_id("nonexistent-config")

        assert "nonexistent-config" in str(exc_info.value)

    def test_load_user_config(self, tmp_path):
        """Test loading user config from the user config directory"""
        user_config_dir = tmp_path / ".graphvq" / "configs"
        user_config_dir.mkdir(parents=True)
        _write(user_config_dir / "my-bench.yaml", dict(MINIMAL, id="my-bench"))

        config = load_config_from_id("my-bench", user_config_dir=user_config_dir)

        assert config.id == "my-bench"

    def test_custom_dir_wins(self, tmp_path):
        """Test custom/ overrides a user config with the same id"""
        user_config_dir = tmp_path / "configs"
        (user_config_dir / "custom").mkdir(parents=True)
        _write(user_config_dir / "dup.yaml", dict(MINIMAL, id="dup", name="User"))
        _write(user_config_dir / "custom" / "dup.yaml", dict(MINIMAL, id="dup", name="Custom"))

        config = load_config_from_id("dup", user_config_dir=user_config_dir)

        assert config.name == "Custom"

    def test_user_dir_shadows_preset(self, tmp_path):
        """Test a user config named like a preset takes priority"""
        user_config_dir = tmp_path / "configs"
        user_config_dir.mkdir()
        _write(user_config_dir / "smoke.yaml", dict(MINIMAL, id="smoke", name="Mine"))

        assert load_config_from_id("smoke", user_config_dir=user_config_dir).name == "Mine"

    def test_search_paths(self, tmp_path):
        """Test the search order is custom, user, presets"""
        paths = get_config_search_paths(tmp_path)

        assert paths[0] == tmp_path / "custom"
        assert paths[1] == tmp_path
        assert paths[2].name == "presets"


@pytest.mark.unit
class TestLoadConfig:
    """Test loading by path or id"""

    def test_path_reference(self, tmp_path):
        """Test an existing file is loaded as a path"""
        path = _write(tmp_path / "exp.yaml", MINIMAL)

        assert load_config(str(path)).id == "test-experiment"

    def test_id_reference(self):
        """Test a bare name is looked up as an id"""
        assert load_config("smoke").id == "smoke"

    def test_missing_yaml_path(self, tmp_path):
        """Test a .yaml reference that does not exist is a missing file, not an id"""
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "nope.yaml")


@pytest.mark.unit
class TestListAvailableConfigs:
    """Test listing available configurations"""

    def test_list_preset_configs(self):
        """Test listing built-in preset configs"""
        config_ids = [c.id for c in list_available_configs()]

        for preset in ("smoke", "city-center-87", "city-center-99", "lab-indoor", "large-vocab"):
            assert preset in config_ids

    def test_list_includes_user_configs(self, tmp_path):
        """Test that list includes user configs"""
        user_config_dir = tmp_path / ".graphvq" / "configs"
        user_config_dir.mkdir(parents=True)
        _write(user_config_dir / "custom.yaml", dict(MINIMAL, id="custom"))

        config_ids = [c.id for c in list_available_configs(user_config_dir=user_config_dir)]

        assert "custom" in config_ids

    def test_list_configs_handles_invalid_files(self, tmp_path, monkeypatch):
        """Test that list handles invalid config files gracefully"""
        preset_dir = tmp_path / "configs" / "presets"
        preset_dir.mkdir(parents=True)
        _write(preset_dir / "valid.yaml", dict(MINIMAL, id="valid"))
        (preset_dir / "invalid.yaml").write_text("invalid yaml content::")

        monkeypatch.setattr("graphvq.core.config_loader.PRESET_DIR", preset_dir)

        configs = list_available_configs(user_config_dir=tmp_path / "empty")

        assert [c.id for c in configs] == ["valid"]
