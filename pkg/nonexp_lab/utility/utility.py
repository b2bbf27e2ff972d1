"""Small helper utilities shared across the nonexp_lab package.

Provides the logger factory (rich handler behind the ``debug`` setting),
seed derivation for reproducible batch sampling, an index-ordered parallel
map, float formatting for reports, and a handful of precondition checks
(``require_positive``, ``require_unit_interval``) that raise the coded
errors of :mod:`error`.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from rich.logging import RichHandler

from . import config_manager
from . import error as E

# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------

_ROOT_LOGGER = "nonexp_lab"
_configured = False


def get_logger(name):
    """Return a logger below the package root logger.

    The root logger is wired once to a ``RichHandler`` on stderr.  Its level
    follows the ``debug`` setting: DEBUG when true, WARNING otherwise.
    """
    global _configured
    root = logging.getLogger(_ROOT_LOGGER)
    if not _configured:
        handler = RichHandler(show_path=False, rich_tracebacks=False)
        handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        root.addHandler(handler)
        root.propagate = False
        _configured = True
    root.setLevel(logging.DEBUG if config_manager.load_setting_value("debug") else logging.WARNING)
    if name.startswith(_ROOT_LOGGER):
        return logging.getLogger(name)
    return root.getChild(name)


# ---------------------------------------------------------------------------
# Seeds and parallel evaluation
# ---------------------------------------------------------------------------

def derive_seeds(seed, count):
    """Return *count* independent integer seeds derived from *seed*.

    Child ``i`` depends only on ``(seed, i)``, so batch results do not depend
    on how batches are scheduled.
    """
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def rng_for(seed, *path):
    """A ``numpy`` Generator for a named sub-stream of *seed*."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(p) for p in path]]))


def sub_seed(seed, *path):
    """An integer seed for the sub-stream ``(seed, *path)``; stable under changes of siblings."""
    state = np.random.SeedSequence([int(seed), *[int(p) for p in path]]).generate_state(1, np.uint64)
    return int(state[0])


def parallel_map(fn, items, threads=None):
    """Apply *fn* to every item and return the results in input order.

    Args:
        fn:      Pure function of one item.
        items:   Sequence of inputs.
        threads: Worker count; ``None`` resolves via
            :func:`config_manager.thread_count`.
    """
    items = list(items)
    workers = threads if threads else config_manager.thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


# ---------------------------------------------------------------------------
# Formatting
# ---------------------------------------------------------------------------

def format_float(value):
    """Render a number with 17 significant digits (replay fidelity)."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


# ---------------------------------------------------------------------------
# Precondition checks
# ---------------------------------------------------------------------------

def require_positive(name, value, code="1102"):
    """Raise ``E.InputError`` unless *value* > 0."""
    if not value > 0:
        raise E.InputError(f"{name} must be positive, got {value!r}.", code=code,
                           context={name: value})
    return value


def require_unit_interval(name, value, code, closed=False):
    """Raise ``E.InputError`` unless *value* lies in (0, 1), or [0, 1] when *closed*."""
    ok = 0.0 <= value <= 1.0 if closed else 0.0 < value < 1.0
    if not ok:
        raise E.InputError(f"{name} outside {'[0, 1]' if closed else '(0, 1)'}: {value!r}.",
                           code=code, context={name: value})
    return value
