"""
Shared fixtures for the nonexp_lab test suite.

An autouse fixture (``fresh_preset``) resets the library settings before
every test so that each case starts from the factory defaults.
"""

import os

import pytest

import nonexp_lab
from nonexp_lab.utility import config_manager


@pytest.fixture(autouse=True)
def fresh_preset():
    """Reset the settings file and the thread override before every test."""
    os.environ.pop(config_manager.THREADS_ENV, None)
    config_manager.reset_settings()
    return config_manager.load_setting_value("all")


@pytest.fixture
def line():
    """The real line."""
    return nonexp_lab.make_model("euclidean", 1)


@pytest.fixture
def plane():
    return nonexp_lab.make_model("euclidean", 2)


@pytest.fixture
def hyperbolic():
    return nonexp_lab.make_model("hyperboloid2")


@pytest.fixture
def log_gauge():
    return nonexp_lab.make_log_gauge()


@pytest.fixture
def translation(line):
    """``x -> x + 1`` on the line, nonexpansive with constant one."""
    return nonexp_lab.affine(line, 1.0, [1.0])


@pytest.fixture
def half_contraction(line):
    """``x -> x/2 + 1`` on the line, fixed point 2."""
    return nonexp_lab.affine(line, 0.5, [1.0])
