"""
CLI sub-package for nonexp_lab.

Re-exports :func:`main` so that ``nonexp_lab.cli:main`` resolves for the
console_scripts entry point defined in ``pyproject.toml``.
"""

from .cli import build_parser, main
from .experiments import (
    COMMANDS, cmd_fixpoint, cmd_lipschitz_profile, cmd_metric, cmd_verify_axioms, cmd_witness,
    run_experiment,
)
from .reports import Report, write_report
