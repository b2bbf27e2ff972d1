"""
Command-line interface for nonexp_lab.

Batch only: every subcommand reads an experiment config, runs one
experiment and writes a report::

    $ nonexp-lab witness --config configs/ball_invariance.json --members 100 --out run.csv
    $ nonexp-lab fixpoint --config configs/fixpoint.json --format json --out run.json

Exit codes:
    - ``0`` every check passed
    - ``1`` at least one check failed
    - ``2`` the config could not be read, validated or built

Entry point (defined in ``pyproject.toml``):
    - ``nonexp-lab`` → :func:`main`
"""

import argparse

from rich.console import Console

from .. import __version__
from ..utility import config_manager
from ..utility import error as E
from .experiments import COMMANDS, run_experiment
from .reports import FORMATS, print_report, write_report

console = Console(stderr=True)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2

_HELP = {
    "verify-axioms": "check the hyperbolic space axioms of the listed models",
    "metric": "evaluate a map metric, optionally with equivalence and divergence checks",
    "witness": "build a porosity witness and verify members of its ball",
    "fixpoint": "run Picard iteration, optionally with a Rakotch audit",
    "lipschitz-profile": "profile local Lipschitz constants before and after an isometry patch",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="nonexp-lab",
                                     description="Numerical lab for nonexpansive mappings")
    parser.add_argument("--version", action="version", version=f"nonexp-lab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", required=True, help="experiment config file (JSON, schema v1)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="report path; without it only the table is printed")
        p.add_argument("--format", choices=FORMATS, help="report format (default: csv)")
        p.add_argument("--members", type=int, help="members per witness ball")
        p.add_argument("--budget", type=int, help="sampling budget per estimate")
        p.add_argument("--threads", type=int, help="worker threads (0: all cores)")
        p.add_argument("--quiet", action="store_true", help="do not print the result table")
    return parser


def apply_overrides(config, args):
    """Command-line values take precedence over the config file."""
    for key in ("seed", "members", "budget", "threads"):
        value = getattr(args, key)
        if value is not None:
            config[key] = value
    if args.out is not None:
        config["output"]["path"] = args.out
    if args.format is not None:
        config["output"]["format"] = args.format
    return config


def main(argv=None):
    """Main CLI entry point (invoked by ``nonexp-lab``).

    Args:
        argv: argument list; ``None`` reads ``sys.argv``.

    Returns:
        int: the exit code.
    """
    args = build_parser().parse_args(argv)
    try:
        config = apply_overrides(config_manager.load_experiment(args.config), args)
        report = run_experiment(config, args.command)
        out = config["output"]["path"]
        if out:
            write_report(report, out, config["output"]["format"])
    except E.LabError as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        return EXIT_CONFIG_ERROR

    if not args.quiet:
        print_report(report, console)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED
