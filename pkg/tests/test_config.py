import math

import pytest

from bellmc.config import (
    ExperimentConfig,
    format_angle,
    from_mapping,
    load_config,
    loads,
    parse_angle,
)
from bellmc.errors import ConfigParseError, ConfigurationError

MINIMAL = """
model:
  both:
    type: malus-probabilistic
run:
  events: 1000
settings:
  pair:
    alpha: "0 rad"
    beta: "22.5 deg"
"""

FULL = """
source:
  kind: uniform-disc
  transverse_spread: 2.5
  cone_half_angle: "0.002 rad"
  center: [0.1, -0.2]
geometry:
  length_1: 500.0
  length_2: 750.0
lattice:
  period: 0.8
  rotation_center: [0.05, 0.0]
model:
  device_1:
    type: malus-deterministic
  device_2:
    type: impact-modulated
    epsilon: 0.5
    radial_profile: gaussian
    scale: 0.4
run:
  events: 5000
  seed: 9
  workers: 2
settings:
  quad:
    alpha: "0 rad"
    alpha_prime: "45 deg"
    beta: "22.5 deg"
    beta_prime: "-22.5 deg"
"""


class TestParseAngle:
    def test_units(self):
        assert parse_angle("0.5 rad", "x") == 0.5
        assert parse_angle("45 deg", "x") == pytest.approx(math.pi / 4)
        assert parse_angle("-22.5deg", "x") == pytest.approx(-math.pi / 8)
        assert parse_angle("1e-3 rad", "x") == 1e-3

    def test_bare_numbers_rejected(self):
        with pytest.raises(ConfigurationError, match="unit suffix"):
            parse_angle(0.5, "settings.pair.alpha")
        with pytest.raises(ConfigurationError, match="settings.pair.alpha"):
            parse_angle("0.5", "settings.pair.alpha")
        with pytest.raises(ConfigurationError):
            parse_angle("0.5 radians?", "x")

    def test_format_roundtrip(self):
        for value in (0.0, math.pi / 8, -1.2345678901234567):
            assert parse_angle(format_angle(value), "x") == value


class TestMinimalAndDefaults:
    def test_minimal_config(self):
        cfg = loads(MINIMAL)
        assert isinstance(cfg, ExperimentConfig)
        assert cfg.model_spec_1 == ("malus-probabilistic", {})
        assert cfg.events == 1000
        assert cfg.seed == 0
        assert cfg.workers == 1
        assert cfg.settings_kind == "pair"
        assert cfg.settings[1] == pytest.approx(math.pi / 8)
        # defaulted sections
        assert cfg.source.kind == "gaussian"
        assert cfg.arms.length_1 == cfg.arms.length_2
        assert cfg.lattice.period > 0

    def test_full_config(self):
        cfg = loads(FULL)
        assert cfg.source.kind == "uniform-disc"
        assert cfg.source.center == (0.1, -0.2)
        assert cfg.arms.length_2 == 750.0
        assert cfg.lattice.rotation_center == (0.05, 0.0)
        assert cfg.model_spec_1 == ("malus-deterministic", {})
        assert cfg.model_spec_2[0] == "impact-modulated"
        assert cfg.workers == 2
        assert cfg.settings_kind == "quad"
        model_1, model_2 = cfg.build_models()
        assert model_1.name == "malus-deterministic"
        assert model_2.params.epsilon == 0.5


class TestValidation:
    def test_unknown_keys_carry_paths(self):
        with pytest.raises(ConfigurationError, match="source"):
            loads(MINIMAL + "source:\n  spread: 1.0\n")
        with pytest.raises(ConfigurationError, match="model.device_1"):
            from_mapping({
                "model": {"device_1": {"type": "malus-probabilistic", "gain": 2},
                          "device_2": {"type": "malus-probabilistic"}},
                "run": {"events": 10},
                "settings": {"pair": {"alpha": "0 rad", "beta": "1 rad"}},
            })

    def test_top_level_unknown_section(self):
        with pytest.raises(ConfigurationError, match="config"):
            loads(MINIMAL + "detectors:\n  count: 2\n")

    def test_missing_required_sections(self):
        with pytest.raises(ConfigurationError, match="model"):
            loads("run:\n  events: 10\nsettings:\n  pair:\n    alpha: '0 rad'\n    beta: '1 rad'\n")

    def test_model_section_shapes(self):
        base = {
            "run": {"events": 10},
            "settings": {"pair": {"alpha": "0 rad", "beta": "1 rad"}},
        }
        with pytest.raises(ConfigurationError, match="not both"):
            from_mapping({**base, "model": {
                "both": {"type": "malus-probabilistic"},
                "device_1": {"type": "malus-probabilistic"},
            }})
        with pytest.raises(ConfigurationError, match="device_1"):
            from_mapping({**base, "model": {"device_2": {"type": "malus-probabilistic"}}})
        # the entangled reference cannot be assigned to just one device
        with pytest.raises(ConfigurationError, match="both devices"):
            from_mapping({**base, "model": {
                "device_1": {"type": "qm-reference"},
                "device_2": {"type": "malus-probabilistic"},
            }})

    def test_qm_reference_on_both(self):
        cfg = from_mapping({
            "model": {"both": {"type": "qm-reference"}},
            "run": {"events": 10},
            "settings": {"pair": {"alpha": "0 rad", "beta": "1 rad"}},
        })
        assert cfg.qm_reference
        assert cfg.build_models() == (None, None)

    def test_run_section(self):
        base = {
            "model": {"both": {"type": "malus-probabilistic"}},
            "settings": {"pair": {"alpha": "0 rad", "beta": "1 rad"}},
        }
        with pytest.raises(ConfigurationError, match="run.events"):
            from_mapping({**base, "run": {}})
        with pytest.raises(ConfigurationError, match="run.events"):
            from_mapping({**base, "run": {"events": 0}})
        with pytest.raises(ConfigurationError, match="run.events"):
            from_mapping({**base, "run": {"events": True}})
        with pytest.raises(ConfigurationError, match="run.workers"):
            from_mapping({**base, "run": {"events": 5, "workers": 0}})

    def test_settings_section(self):
        base = {
            "model": {"both": {"type": "malus-probabilistic"}},
            "run": {"events": 10},
        }
        with pytest.raises(ConfigurationError, match="exactly one"):
            from_mapping({**base, "settings": {}})
        with pytest.raises(ConfigurationError, match="exactly one"):
            from_mapping({**base, "settings": {
                "pair": {"alpha": "0 rad", "beta": "1 rad"},
                "list": ["0 rad"],
            }})
        with pytest.raises(ConfigurationError, match="settings.quad.beta_prime"):
            from_mapping({**base, "settings": {"quad": {
                "alpha": "0 rad", "alpha_prime": "1 rad", "beta": "2 rad",
            }}})
        cfg = from_mapping({**base, "settings": {"list": ["0 rad", "45 deg"]}})
        assert cfg.settings_kind == "list"
        assert cfg.settings[1] == pytest.approx(math.pi / 4)
        with pytest.raises(ConfigurationError, match="settings.list"):
            from_mapping({**base, "settings": {"list": []}})


class TestRoundTrip:
    @pytest.mark.parametrize("text", [MINIMAL, FULL])
    def test_mapping_roundtrip_is_identity(self, text):
        cfg = loads(text)
        assert from_mapping(cfg.to_mapping()) == cfg

    def test_qm_roundtrip(self):
        cfg = from_mapping({
            "model": {"both": {"type": "qm-reference"}},
            "run": {"events": 10, "seed": 3},
            "settings": {"quad": {
                "alpha": "0 rad", "alpha_prime": "45 deg",
                "beta": "22.5 deg", "beta_prime": "-22.5 deg",
            }},
        })
        assert from_mapping(cfg.to_mapping()) == cfg


class TestSyntaxErrors:
    def test_yaml_error_carries_location(self):
        with pytest.raises(ConfigParseError, match="line"):
            loads("model: {\n")

    def test_non_mapping_document(self):
        with pytest.raises(ConfigurationError, match="mapping"):
            loads("- just\n- a\n- list\n")

    def test_load_config_reads_files(self, tmp_path):
        path = tmp_path / "exp.yaml"
        path.write_text(MINIMAL)
        cfg = load_config(str(path))
        assert cfg.events == 1000
        with pytest.raises(OSError):
            load_config(str(tmp_path / "missing.yaml"))
