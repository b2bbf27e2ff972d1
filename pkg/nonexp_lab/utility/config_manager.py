# config_manager.py
"""
Configuration management for nonexp_lab.

Responsibilities
----------------
- Load and save the persistent library settings (``config.json`` next to the
  package): tolerances, sampling budgets, truncations, thread count.
- Load and validate experiment config files (schema v1) for the CLI.

Design Notes
------------
- JSON everywhere, for readability and manual editing.
- Settings are validated against the type of the stored value; experiment
  configs are validated section by section and fail with 51xx codes.
- ``NONEXP_LAB_THREADS`` overrides the ``threads`` setting; no other
  environment variable is read.
"""

import json
import os
from pathlib import Path

from . import error as E

config_json = Path(__file__).resolve().parent.parent / "config.json"

SCHEMA_VERSION = 1
THREADS_ENV = "NONEXP_LAB_THREADS"

DEFAULT_SETTINGS = {
    "debug": False,
    "tolerance_exact": 1e-9,
    "tolerance_hyperbolic": 1e-6,
    "lipschitz_slack": 1e-7,
    "strictness_slack": 1e-9,
    "intermediate_lip_slack": 0.25,
    "l1_max_dim": 8,
    "series_truncation_log": 60,
    "series_truncation_power": 10000,
    "default_budget": 2000,
    "refinement_rounds": 5,
    "member_safety_margin": 0.1,
    "member_metric_budget": 256,
    "max_iter": 1000000,
    "trajectory_dense_prefix": 1000,
    "threads": 0,
    "quasi_random": False,
    "dense_search_limit": 400000,
}

# Settings that must be strictly positive / nonnegative.
_POSITIVE = {
    "l1_max_dim", "series_truncation_log", "series_truncation_power",
    "default_budget", "member_metric_budget", "max_iter", "dense_search_limit",
}
_NONNEGATIVE = {
    "tolerance_exact", "tolerance_hyperbolic", "lipschitz_slack",
    "strictness_slack", "intermediate_lip_slack", "refinement_rounds",
    "member_safety_margin", "trajectory_dense_prefix", "threads",
}


def load_setting_value(key_value):
    """Load a specific setting value or all settings from config.json.

    Parameters
    ----------
    key_value : str
        - "all" → returns the full dictionary
        - otherwise → returns a single value, falling back to the factory
          default when the key is missing from the file

    Returns
    -------
    dict | any
        Dictionary of settings or individual value.
    """
    try:
        with open(config_json, 'r', encoding='utf-8') as f:
            settings_dict = json.load(f)
    except (FileNotFoundError, json.JSONDecodeError):
        settings_dict = dict(DEFAULT_SETTINGS)

    if key_value == "all":
        merged = dict(DEFAULT_SETTINGS)
        merged.update(settings_dict)
        return merged
    if key_value in settings_dict:
        return settings_dict[key_value]
    return DEFAULT_SETTINGS.get(key_value, 0)


def thread_count():
    """Resolve the worker count: env override, then setting, then cores."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise E.ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}.", code="5003")
        if value < 0:
            raise E.ConfigError(f"{THREADS_ENV} must be nonnegative, got {value}.", code="5003")
    else:
        value = int(load_setting_value("threads"))
    return value if value > 0 else (os.cpu_count() or 1)


def _write(settings):
    try:
        with open(config_json, 'w', encoding='utf-8') as f:
            json.dump(settings, f, indent=4)
            return 1
    except OSError as e:
        raise E.ConfigError(f"Could not save configuration file: {e}", code="5002")


def reset_settings():
    """Reset all settings to their factory default values.

    Returns:
        int: ``1`` on success.
    """
    return _write(dict(DEFAULT_SETTINGS))


def _check_value(key_value, new_value, expected_type):
    # bool is a subclass of int: never accept it for a number
    if expected_type is bool:
        if not isinstance(new_value, bool):
            raise E.ConfigError(
                f"Type mismatch for '{key_value}'. Expected bool, got {type(new_value).__name__}.",
                code="5000")
        return new_value
    if isinstance(new_value, bool):
        raise E.ConfigError(
            f"Type mismatch for '{key_value}'. Expected {expected_type.__name__}, got bool.",
            code="5000")
    if expected_type is float and isinstance(new_value, int):
        new_value = float(new_value)
    if not isinstance(new_value, expected_type):
        raise E.ConfigError(
            f"Type mismatch for '{key_value}'. Expected {expected_type.__name__}, "
            f"got {type(new_value).__name__}.", code="5000")
    if key_value in _POSITIVE and new_value <= 0:
        raise E.ConfigError(f"'{key_value}' must be positive, got {new_value}.", code="5003")
    if key_value in _NONNEGATIVE and new_value < 0:
        raise E.ConfigError(f"'{key_value}' must be nonnegative, got {new_value}.", code="5003")
    return new_value


def save_setting(key_value, new_value):
    """Persist a single setting to ``config.json`` with validation.

    Validation rules:

    1. **Type checking**: the new value must match the type of the factory
       default.  An ``int`` is accepted (and stored as ``float``) where a
       float is expected; a ``bool`` is never accepted for a number.
    2. **Range checking**: counts and budgets must be positive, tolerances
       and slacks nonnegative.

    Unknown keys are rejected: the library reads no free-form settings.

    Parameters
    ----------
    key_value : str
        The setting name to update.
    new_value : any
        The new value to assign.

    Returns
    -------
    int
        ``1`` on success.

    Raises
    ------
    E.ConfigError
        On unknown key or type mismatch (code ``5000``), out-of-range value
        (code ``5003``) or file I/O failure (code ``5002``).
    """
    if key_value not in DEFAULT_SETTINGS:
        raise E.ConfigError(f"Unknown setting '{key_value}'.", code="5000")
    expected_type = type(DEFAULT_SETTINGS[key_value])
    value = _check_value(key_value, new_value, expected_type)

    settings = load_setting_value("all")
    settings[key_value] = value
    return _write(settings)


def load_preset(settings: dict):
    """Replace the entire configuration with the given dictionary.

    Every key must be present exactly once and pass the same validation as
    :func:`save_setting`.

    Returns:
        int: ``1`` on success.

    Raises:
        E.ConfigError: On unknown or missing keys (code ``5004``) or invalid
            values (codes ``5000``/``5003``).
    """
    unknown = sorted(k for k in settings if k not in DEFAULT_SETTINGS)
    missing = sorted(k for k in DEFAULT_SETTINGS if k not in settings)
    if unknown or missing:
        raise E.ConfigError(f"Preset mismatch, unknown={unknown}, missing={missing}",
                            code="5004", context={"unknown": unknown, "missing": missing})
    checked = {k: _check_value(k, settings[k], type(DEFAULT_SETTINGS[k])) for k in DEFAULT_SETTINGS}
    return _write(checked)


# ---------------------------------------------------------------------------
# Experiment config files (schema v1)
# ---------------------------------------------------------------------------

EXPERIMENT_DEFAULTS = {
    "seed": 0,
    "threads": None,
    "budget": None,
    "members": 100,
    "tolerance": None,
    "output": {"path": None, "format": "csv"},
}

# Sections each subcommand cannot run without.
REQUIRED_SECTIONS = {
    "verify-axioms": ("models",),
    "metric": ("model",),
    "witness": ("model", "maps", "witness"),
    "fixpoint": ("model", "maps", "fixpoint"),
    "lipschitz-profile": ("model", "maps", "profile"),
}


def load_experiment(path):
    """Read an experiment config file.

    Parameters
    ----------
    path : str | Path
        Location of the JSON file.

    Returns
    -------
    dict
        The config with :data:`EXPERIMENT_DEFAULTS` filled in.

    Raises
    ------
    E.ConfigError
        If the file is missing or not valid JSON (code ``5100``) or the
        schema version is not supported (code ``5101``).
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise E.ConfigError(f"Experiment config could not be read: {e}", code="5100")
    if not isinstance(raw, dict):
        raise E.ConfigError("Experiment config must be a JSON object.", code="5100")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise E.ConfigError(f"Unsupported schema_version {version!r}.", code="5101")

    config = {k: (dict(v) if isinstance(v, dict) else v) for k, v in EXPERIMENT_DEFAULTS.items()}
    for key, value in raw.items():
        if key == "output" and isinstance(value, dict):
            config["output"].update(value)
        else:
            config[key] = value
    config["schema_version"] = SCHEMA_VERSION
    return config


def _require_int(config, key, minimum, allow_none=False):
    value = config.get(key)
    if value is None and allow_none:
        return
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise E.ConfigError(f"'{key}' must be an integer >= {minimum}, got {value!r}.", code="5103")


def validate_experiment(config, command):
    """Check that *config* carries what *command* needs.

    Raises:
        E.ConfigError: Unknown command (``5105``), missing section
            (``5102``) or invalid top-level value (``5103``).
    """
    if command not in REQUIRED_SECTIONS:
        raise E.ConfigError(f"Unknown subcommand '{command}'.", code="5105")
    for section in REQUIRED_SECTIONS[command]:
        if section not in config:
            raise E.ConfigError(f"Missing config section '{section}' for {command}.",
                                code="5102", context={"section": section})
    _require_int(config, "seed", 0)
    _require_int(config, "threads", 0, allow_none=True)
    _require_int(config, "budget", 1, allow_none=True)
    _require_int(config, "members", 0)
    tol = config.get("tolerance")
    if tol is not None and (isinstance(tol, bool) or not isinstance(tol, (int, float)) or tol < 0):
        raise E.ConfigError(f"'tolerance' must be a nonnegative number, got {tol!r}.", code="5103")
    fmt = config["output"].get("format", "csv")
    if fmt not in ("csv", "json"):
        raise E.ConfigError(f"Output format must be csv or json, got {fmt!r}.", code="5103")
    if command == "verify-axioms" and not isinstance(config["models"], list):
        raise E.ConfigError("'models' must be a list of model specs.", code="5103")
    return config
