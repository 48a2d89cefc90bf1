import dataclasses

import pytest
import yaml

from nile_momdp.config import (ENV_CONFIG_VAR, MoeaConfig, default_config_text,
                               load_config, parse_config)
from nile_momdp.errors import ConfigurationError

MINIMAL = """
basin:
  reservoirs:
    - name: dam
      capacity: 1.0e9
      dead_storage: 1.0e8
      max_release: 5000.0
      level_storage_table: [[0.0, 100.0, 5.0e7], [1.0e9, 150.0, 1.5e8]]
      evap_rate_by_month: [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]
  plants:
    - name: dam_power
      reservoir: dam
      efficiency: 0.9
      installed_capacity: 1.0e9
      turbine_max_flow: 2000.0
      tailwater_level: 95.0
  demands:
    - name: farm
      monthly_demand: [5.0e8, 5.0e8, 5.0e8, 5.0e8, 5.0e8, 5.0e8,
                       5.0e8, 5.0e8, 5.0e8, 5.0e8, 5.0e8, 5.0e8]
  inflows:
    - name: head
      monthly_mean: [400.0, 400.0, 400.0, 400.0, 400.0, 400.0,
                     400.0, 400.0, 400.0, 400.0, 400.0, 400.0]
      monthly_cv: [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
  topology:
    - {name: head, kind: inflow, downstream: dam}
    - {name: dam, kind: reservoir, downstream: farm}
    - {name: farm, kind: demand, downstream: null}
env:
  horizon: 24
  initial_storages: {dam: 5.0e8}
  min_power_level_had: 120.0
"""


def minimal_doc():
    return yaml.safe_load(MINIMAL)


def test_packaged_default_loads():
    cfg = load_config()
    assert cfg.basin.reservoir_order() == ("gerd", "roseires", "sennar", "had")
    assert cfg.env.horizon == 240
    assert cfg.moea == MoeaConfig(n_rbf=6, pop=100, nfe=20000, eta_c=15.0, eta_m=20.0)
    assert cfg.env.initial_storages[0] == 40.0e9


def test_minimal_doc_defaults():
    cfg = parse_config(minimal_doc())
    assert cfg.env.horizon == 24
    assert cfg.env.gamma == 1.0
    assert cfg.env.deficit_power == 1.0
    assert cfg.moea == MoeaConfig()


def test_yaml_11_scientific_strings_coerce():
    # "1e9" without a decimal point parses as a string under YAML 1.1
    doc = minimal_doc()
    doc["basin"]["reservoirs"][0]["capacity"] = "1e9"
    doc["env"]["initial_storages"]["dam"] = "5e8"
    cfg = parse_config(doc)
    assert cfg.basin.reservoirs[0].capacity == 1.0e9
    assert cfg.env.initial_storages[0] == 5.0e8


def test_non_numeric_rejected():
    doc = minimal_doc()
    doc["basin"]["reservoirs"][0]["capacity"] = "lots"
    with pytest.raises(ConfigurationError):
        parse_config(doc)


@pytest.mark.parametrize("mutate", [
    lambda d: d.__setitem__("extra", 1),
    lambda d: d["basin"].__setitem__("rivers", []),
    lambda d: d["env"].__setitem__("horizons", 10),
    lambda d: d["basin"]["reservoirs"][0].__setitem__("colour", "blue"),
])
def test_unknown_keys_rejected(mutate):
    doc = minimal_doc()
    mutate(doc)
    with pytest.raises(ConfigurationError):
        parse_config(doc)


def test_missing_sections_rejected():
    with pytest.raises(ConfigurationError):
        parse_config({"basin": minimal_doc()["basin"]})
    with pytest.raises(ConfigurationError):
        parse_config({"env": minimal_doc()["env"]})


def test_initial_storages_must_cover_reservoirs():
    doc = minimal_doc()
    doc["env"]["initial_storages"] = {}
    with pytest.raises(ConfigurationError):
        parse_config(doc)
    doc = minimal_doc()
    doc["env"]["initial_storages"] = {"dam": 5.0e8, "ghost": 1.0}
    with pytest.raises(ConfigurationError):
        parse_config(doc)


def test_initial_storage_above_capacity_rejected():
    doc = minimal_doc()
    doc["env"]["initial_storages"]["dam"] = 2.0e9
    with pytest.raises(ConfigurationError):
        parse_config(doc)


@pytest.mark.parametrize("field,value", [
    ("horizon", 0), ("gamma", 0.0), ("gamma", 1.5), ("deficit_power", 0.0),
])
def test_env_bounds(field, value):
    doc = minimal_doc()
    doc["env"][field] = value
    with pytest.raises(ConfigurationError):
        parse_config(doc)


@pytest.mark.parametrize("field,value", [
    ("pop", 3), ("pop", 7), ("n_rbf", 0), ("nfe", 10), ("eta_c", 0.0),
])
def test_moea_bounds(field, value):
    doc = minimal_doc()
    doc["emodps"] = {field: value}
    if field == "nfe":
        doc["emodps"]["pop"] = 50
    with pytest.raises(ConfigurationError):
        parse_config(doc)


def test_moea_overrides_apply():
    doc = minimal_doc()
    doc["emodps"] = {"pop": 8, "nfe": 64, "n_rbf": 2}
    cfg = parse_config(doc)
    assert cfg.moea.pop == 8
    assert cfg.moea.nfe == 64
    assert cfg.moea.n_rbf == 2
    assert cfg.moea.eta_c == 15.0


def test_load_from_path_and_env_var(tmp_path, monkeypatch):
    path = tmp_path / "b.yaml"
    path.write_text(MINIMAL, encoding="utf-8")
    cfg = load_config(str(path))
    assert cfg.source == str(path)

    monkeypatch.setenv(ENV_CONFIG_VAR, str(path))
    cfg = load_config()
    assert cfg.source == str(path)
    assert cfg.env.horizon == 24

    # explicit path wins over the environment variable
    other = tmp_path / "c.yaml"
    other.write_text(MINIMAL.replace("horizon: 24", "horizon: 36"), encoding="utf-8")
    cfg = load_config(str(other))
    assert cfg.env.horizon == 36


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(str(tmp_path / "nope.yaml"))


def test_invalid_yaml_is_config_error(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("basin: [unclosed", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_config(str(path))


def test_default_text_parses_standalone():
    cfg = parse_config(yaml.safe_load(default_config_text()))
    assert cfg.env.min_power_level_had == 159.0


def test_configs_are_immutable():
    cfg = parse_config(minimal_doc())
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.env.horizon = 10
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.moea.pop = 10
