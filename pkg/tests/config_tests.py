"""
Tests for the settings file and the experiment config loader.

Coverage areas
--------------
- change_setting / load_preset / reset_settings round trips and errors
- Thread count resolution (setting, environment override)
- Experiment configs: defaults, schema version, per-command validation
"""

import json
import os

import pytest

import nonexp_lab
from nonexp_lab.utility import config_manager
from nonexp_lab.utility import error as E


# ---------------------------------------------------------------------------
# 1) Settings
# ---------------------------------------------------------------------------

def test_defaults_after_reset(fresh_preset):
    assert fresh_preset == config_manager.DEFAULT_SETTINGS
    assert nonexp_lab.load_one_setting("default_budget") == 2000


def test_change_setting_persists():
    assert nonexp_lab.change_setting("default_budget", 500) == 1
    assert nonexp_lab.load_one_setting("default_budget") == 500
    assert nonexp_lab.load_all_settings()["default_budget"] == 500


def test_int_accepted_for_float_setting():
    nonexp_lab.change_setting("lipschitz_slack", 0)
    value = nonexp_lab.load_one_setting("lipschitz_slack")
    assert value == 0.0 and isinstance(value, float)


@pytest.mark.parametrize("key, value", [
    ("default_budget", 1.5),
    ("debug", 1),
    ("tolerance_exact", True),
    ("no_such_setting", 1),
])
def test_change_setting_type_errors(key, value):
    with pytest.raises(E.ConfigError) as exc:
        nonexp_lab.change_setting(key, value)
    assert exc.value.code == "5000"


@pytest.mark.parametrize("key, value", [
    ("default_budget", 0),
    ("max_iter", -3),
    ("strictness_slack", -1e-9),
])
def test_change_setting_range_errors(key, value):
    with pytest.raises(E.ConfigError) as exc:
        nonexp_lab.change_setting(key, value)
    assert exc.value.code == "5003"


def test_load_preset_replaces_everything():
    preset = dict(config_manager.DEFAULT_SETTINGS, default_budget=64, debug=True)
    assert nonexp_lab.load_preset(preset) == 1
    assert nonexp_lab.load_one_setting("default_budget") == 64
    assert nonexp_lab.load_one_setting("debug") is True
    nonexp_lab.reset_settings()
    assert nonexp_lab.load_one_setting("debug") is False


def test_load_preset_rejects_partial_dict():
    with pytest.raises(E.ConfigError) as exc:
        nonexp_lab.load_preset({"debug": True})
    assert exc.value.code == "5004"
    assert "default_budget" in exc.value.context["missing"]


def test_thread_count_setting_and_env(monkeypatch):
    nonexp_lab.change_setting("threads", 3)
    assert config_manager.thread_count() == 3
    monkeypatch.setenv(config_manager.THREADS_ENV, "2")
    assert config_manager.thread_count() == 2


def test_thread_count_zero_means_all_cores():
    assert config_manager.thread_count() == (os.cpu_count() or 1)


def test_thread_env_must_be_integer(monkeypatch):
    monkeypatch.setenv(config_manager.THREADS_ENV, "many")
    with pytest.raises(E.ConfigError) as exc:
        config_manager.thread_count()
    assert exc.value.code == "5003"


# ---------------------------------------------------------------------------
# 2) Experiment configs
# ---------------------------------------------------------------------------

def _write(tmp_path, payload, name="exp.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_load_experiment_fills_defaults(tmp_path):
    path = _write(tmp_path, {"model": {"kind": "euclidean", "dim": 1},
                             "output": {"format": "json"}})
    config = config_manager.load_experiment(path)
    assert config["seed"] == 0
    assert config["members"] == 100
    assert config["output"] == {"path": None, "format": "json"}
    assert config["schema_version"] == 1


def test_load_experiment_missing_file(tmp_path):
    with pytest.raises(E.ConfigError) as exc:
        config_manager.load_experiment(tmp_path / "absent.json")
    assert exc.value.code == "5100"


def test_load_experiment_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(E.ConfigError) as exc:
        config_manager.load_experiment(path)
    assert exc.value.code == "5100"


def test_load_experiment_schema_version(tmp_path):
    path = _write(tmp_path, {"schema_version": 2})
    with pytest.raises(E.ConfigError) as exc:
        config_manager.load_experiment(path)
    assert exc.value.code == "5101"


def test_validate_unknown_command(tmp_path):
    config = config_manager.load_experiment(_write(tmp_path, {}))
    with pytest.raises(E.ConfigError) as exc:
        config_manager.validate_experiment(config, "plot")
    assert exc.value.code == "5105"


def test_validate_missing_section(tmp_path):
    config = config_manager.load_experiment(_write(tmp_path, {"model": {"kind": "euclidean"}}))
    with pytest.raises(E.ConfigError) as exc:
        config_manager.validate_experiment(config, "witness")
    assert exc.value.code == "5102"
    assert exc.value.context["section"] == "maps"


@pytest.mark.parametrize("patch", [
    {"seed": -1},
    {"members": "ten"},
    {"budget": 0},
    {"tolerance": -0.5},
    {"output": {"format": "xml"}},
])
def test_validate_bad_values(tmp_path, patch):
    payload = {"model": {"kind": "euclidean"}, **patch}
    config = config_manager.load_experiment(_write(tmp_path, payload))
    with pytest.raises(E.ConfigError) as exc:
        config_manager.validate_experiment(config, "metric")
    assert exc.value.code == "5103"


def test_verify_axioms_needs_model_list(tmp_path):
    config = config_manager.load_experiment(_write(tmp_path, {"models": {"kind": "l1"}}))
    with pytest.raises(E.ConfigError) as exc:
        config_manager.validate_experiment(config, "verify-axioms")
    assert exc.value.code == "5103"
