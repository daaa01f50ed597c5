"""Test configuration management system."""

import pytest
from pydantic import ValidationError

from ricci_lab.config import (
    ConfigManager,
    FlowConfig,
    GeometryConfig,
    RescaleConfig,
    RunConfig,
    ScanConfig,
)
from ricci_lab.errors import ConfigError


def test_flow_defaults():
    """Test the documented step-size defaults."""
    config = FlowConfig()

    assert config.dt_initial == 1e-3
    assert config.safety == 0.5
    assert config.curvature_ceiling == 1e6
    assert config.output_stride == 1


def test_flow_config_is_frozen():
    """Test a flow configuration cannot be mutated after creation."""
    config = FlowConfig()
    with pytest.raises(ValidationError):
        config.t_max = 1.0


@pytest.mark.parametrize("field, value", [("dt_initial", 0.0), ("safety", 1.5), ("output_stride", 0)])
def test_flow_config_rejects_bad_values(field, value):
    """Test nonpositive steps, safety above one and zero strides."""
    with pytest.raises(ValidationError):
        FlowConfig(**{field: value})


def test_warped_geometry_needs_profile():
    """Test kind = warped without a profile file is invalid."""
    with pytest.raises(ValidationError, match="profile"):
        GeometryConfig(kind="warped")


def test_scan_config_validation():
    """Test unknown quantities, small exponents and increasing eps ladders."""
    with pytest.raises(ValidationError):
        ScanConfig(quantity="Weyl")
    with pytest.raises(ValidationError):
        ScanConfig(alphas=[0.5])
    with pytest.raises(ValidationError):
        ScanConfig(eps_sequence=[1e-3, 1e-2])
    assert ScanConfig(alphas=[2.0, float("inf")]).alphas[-1] == float("inf")


def test_rescale_interval_must_be_ordered():
    """Test a rescale interval needs a < b."""
    with pytest.raises(ValidationError):
        RescaleConfig(Q=2.0, interval=(1.0, 0.0))


def test_unknown_keys_are_rejected():
    """Test typos in configuration keys are errors."""
    with pytest.raises(ValidationError):
        RunConfig(flow={"dt": 1e-3})


class TestConfigManager:
    """Discovery, loading and saving of YAML files."""

    def test_defaults_without_file(self, tmp_path):
        """Test an empty directory loads the default configuration."""
        manager = ConfigManager(tmp_path)

        assert manager.find_config_file() is None
        assert manager.load_config() == RunConfig()

    def test_find_config_file(self, tmp_path):
        """Test the hidden name is preferred over the plain one."""
        (tmp_path / "ricci-lab.yml").write_text("seed: 1\n", encoding="utf-8")
        (tmp_path / ".ricci-lab.yaml").write_text("seed: 2\n", encoding="utf-8")

        manager = ConfigManager(tmp_path)

        assert manager.find_config_file() == tmp_path / ".ricci-lab.yaml"
        assert manager.load_config().seed == 2

    def test_save_and_load(self, tmp_path):
        """Test a saved configuration loads back unchanged."""
        manager = ConfigManager(tmp_path)
        config = RunConfig(
            geometry=GeometryConfig(n=4, c0=2.0),
            flow=FlowConfig(t_max=0.1, output_stride=5),
            rescale=[RescaleConfig(Q=10.0, t_center=0.1, interval=(-1.0, 0.0))],
            seed=7,
        )

        path = manager.save_config(config)

        assert path == tmp_path / "ricci-lab.yaml"
        assert manager.load_config(path) == config

    def test_save_rejects_other_formats(self, tmp_path):
        """Test only YAML extensions are written."""
        with pytest.raises(ConfigError):
            ConfigManager(tmp_path).save_config(RunConfig(), tmp_path / "run.toml")

    def test_invalid_yaml(self, tmp_path):
        """Test unparsable YAML raises ConfigError."""
        path = tmp_path / "ricci-lab.yaml"
        path.write_text("flow: [unclosed\n", encoding="utf-8")

        with pytest.raises(ConfigError, match="cannot parse"):
            ConfigManager(tmp_path).load_config(path)

    def test_non_mapping(self, tmp_path):
        """Test a top-level list is rejected."""
        path = tmp_path / "ricci-lab.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")

        with pytest.raises(ConfigError, match="mapping"):
            ConfigManager(tmp_path).load_config(path)

    def test_validate_file(self, tmp_path):
        """Test validate_file reports instead of raising."""
        good = tmp_path / "good.yaml"
        bad = tmp_path / "bad.yaml"
        good.write_text("geometry:\n  n: 3\n", encoding="utf-8")
        bad.write_text("geometry:\n  kind: warped\n", encoding="utf-8")
        manager = ConfigManager(tmp_path)

        assert manager.validate_file(good) == (True, "Configuration is valid")
        ok, message = manager.validate_file(bad)
        assert not ok
        assert "profile" in message

    def test_missing_file(self, tmp_path):
        """Test an explicit path that does not exist."""
        ok, message = ConfigManager(tmp_path).validate_file(tmp_path / "absent.yaml")

        assert not ok
        assert "not found" in message
