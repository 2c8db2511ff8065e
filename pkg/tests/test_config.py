import pytest
import yaml

from dfrc.config import DEFAULTS, ConfigError, apply_override, from_dict, load_config


def test_defaults_are_reference_settings():
    cfg = load_config()
    assert cfg.geom.M == 10 and cfg.geom.element_spacing == 0.5
    assert cfg.spec.target_directions == (-40.0, 0.0, 40.0)
    assert cfg.spec.L == 1801
    assert (cfg.total_power, cfg.noise_power) == (1.0, 0.01)
    assert cfg.gamma_db == (4.0, 8.0, 12.0, 16.0, 20.0, 24.0)
    assert cfg.users == (2, 4, 6)
    assert cfg.trials == 50 and cfg.block_length == 1024
    assert cfg.methods == ("sdr", "zf")


def test_yaml_file_and_overrides(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump({"design": {"users": [2]}, "trials": 7, "method": "zf"}))
    cfg = load_config(path, ["design.gamma_db=[12]", "seed=5", "beam.grid.resolution=1.0"])
    assert cfg.users == (2,) and cfg.gamma_db == (12.0,)
    assert cfg.trials == 7 and cfg.seed == 5 and cfg.methods == ("zf",)
    assert cfg.spec.L == 181


def test_scalar_lists_are_accepted():
    cfg = from_dict({"design": {"users": 4, "gamma_db": 10}})
    assert cfg.users == (4,) and cfg.gamma_db == (10.0,)


@pytest.mark.parametrize("override", [
    "design.users=[10]",
    "design.users=[0]",
    "trials=0",
    "design.gamma_db=[]",
    "method=mmse",
    "array.num_elements=0",
    "beam.beam_width=-1",
    "design.noise_power=0",
    "nonsense=1",
    "design.unknown=1",
    "design=3",
    "no_equals_sign",
    "design.gamma_db=[a, b]",
])
def test_invalid_configs(override):
    with pytest.raises(ConfigError):
        load_config(None, [override])


def test_bad_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    p = tmp_path / "list.yaml"
    p.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_override_does_not_mutate_defaults():
    raw = apply_override(DEFAULTS, "design.users=[2]")
    assert raw["design"]["users"] == [2]
    assert DEFAULTS["design"]["users"] == [2, 4, 6]
