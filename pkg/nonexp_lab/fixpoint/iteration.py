"""
Picard iteration for nonexpansive maps.

Iteration stops on the displacement residual ``rho(x, f(x))``.  For a map
with claimed constant ``L < 1`` the distance to the fixed point is at most
``residual / (1 - L)``, reported as ``error_bound``.  Maps that are merely
nonexpansive are iterated plainly: a translation never converges and is
reported as such, not raised.

Usage::

    from nonexp_lab.fixpoint import iterate
    from nonexp_lab.mappings import affine

    report = iterate(affine(R1, 0.5, 1.0), [0.0], tol=1e-8)
    report.final_point, report.iterations       # [2.], 27
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..geometry.sampling import ball_sampler
from ..utility import config_manager
from ..utility import error as E
from ..utility.checks import Check, all_passed
from ..utility.utility import get_logger, require_positive

log = get_logger(__name__)

# beyond the dense prefix, record iteration k when it passes THINNING_FACTOR times the last mark
THINNING_FACTOR = 2


@dataclass
class FixedPointReport:
    """Outcome of a Picard iteration.

    Attributes:
        iterations: number of map applications performed.
        final_point: the last iterate.
        residual: ``rho(final_point, f(final_point))``.
        trajectory_sample: ``(iteration, residual)`` pairs, dense then thinned.
        gauge_used: the :class:`RakotchGauge` of an audit, ``None`` for plain runs.
        converged: ``residual <= tol``.
        error_bound: ``residual / (1 - L)`` when ``claimed_lip < 1``.
        max_distance: largest ``rho(x_k, theta)`` over all iterates when a
            base point was given.
    """
    iterations: int
    final_point: np.ndarray
    residual: float
    trajectory_sample: list
    gauge_used: object = None
    converged: bool = False
    tol: float = 0.0
    error_bound: float = None
    max_distance: float = None
    residuals: list = field(default=None, repr=False)

    def describe(self):
        return {"iterations": self.iterations, "final_point": self.final_point.tolist(),
                "residual": self.residual, "converged": self.converged,
                "error_bound": self.error_bound, "max_distance": self.max_distance}


def _max_iter(max_iter):
    if max_iter is None:
        max_iter = int(config_manager.load_setting_value("max_iter"))
    if max_iter < 1:
        raise E.InputError(f"max_iter must be at least 1: {max_iter!r}", code="1401")
    return int(max_iter)


def _picard(f, x0, tol, max_iter, theta=None, keep_residuals=False):
    model = f.model
    dense = int(config_manager.load_setting_value("trajectory_dense_prefix"))
    x = model.validate(x0)
    sample, residuals = [], []
    next_mark = max(dense, 1)
    max_distance = None if theta is None else model.dist(x, theta)
    k = 0
    while True:
        fx = f(x)
        res = model.dist(x, fx)
        if keep_residuals:
            residuals.append(res)
        if k < dense or k >= next_mark:
            sample.append((k, res))
            if k >= next_mark:
                next_mark *= THINNING_FACTOR
        if res <= tol or k >= max_iter:
            break
        x = fx
        k += 1
        if theta is not None:
            max_distance = max(max_distance, model.dist(x, theta))
    if sample[-1][0] != k:
        sample.append((k, res))
    converged = res <= tol
    L = f.claimed_lip
    bound = res / (1.0 - L) if L < 1.0 else None
    if not converged:
        log.warning("iteration did not converge: residual %.6g after %d steps", res, k)
    return FixedPointReport(k, x, float(res), sample, converged=converged, tol=tol,
                            error_bound=bound, max_distance=max_distance,
                            residuals=residuals if keep_residuals else None)


def iterate(f, x0, tol, max_iter=None, theta=None):
    """Picard iteration ``x_{k+1} = f(x_k)`` until ``rho(x_k, f(x_k)) <= tol``.

    Args:
        f:        the map.
        x0:       start point.
        tol:      positive residual tolerance.
        max_iter: iteration cap; defaults to the ``max_iter`` setting.
        theta:    optional base point; the report then carries ``max_distance``.

    Returns:
        FixedPointReport: ``converged`` is false when the cap is reached.

    Raises:
        E.InputError: ``tol <= 0`` (``1400``) or ``max_iter < 1`` (``1401``).
    """
    require_positive("tol", tol, code="1400")
    max_iter = _max_iter(max_iter)
    if theta is not None:
        theta = f.model.validate(theta)
    report = _picard(f, x0, tol, max_iter, theta)
    log.debug("iterate %r: %d steps, residual %.3e", f.root, report.iterations, report.residual)
    return report


class BallCheck(NamedTuple):
    """``holds`` iff every sampled image stays in the ball; ``worst_margin = max rho(f(x), theta) - M``."""
    holds: bool
    worst_margin: float


def ball_invariance_check(f, theta, M, budget=None, seed=0):
    """Sampled check of ``f(B(theta, M)) in B(theta, M)``.

    The sample includes the center and the axis extremes of the ball, where
    affine maps attain their worst case.

    Raises:
        E.InputError: ``M <= 0`` (``1003``).
    """
    require_positive("M", M, code="1003")
    model = f.model
    theta = model.validate(theta)
    if budget is None:
        budget = int(config_manager.load_setting_value("default_budget"))
    xs = ball_sampler(model, theta, M, budget, seed, include_extremes=True)
    worst = float(np.max(model.dist_many(theta, f.evaluate_many(xs)))) - M
    return BallCheck(worst <= model.tol * max(1.0, M), worst)


@dataclass
class RakotchAudit:
    """Report of :func:`rakotch_convergence_audit`."""
    primary: FixedPointReport
    second: FixedPointReport
    checks: list

    @property
    def unique(self):
        return next(c.passed for c in self.checks if c.name == "unique_limit")

    @property
    def passed(self):
        return all_passed(self.checks)


def rakotch_convergence_audit(f, theta, x0, gauge, tol, x1=None, max_iter=None):
    """Iterate *f* and audit the step-function bound along the trajectory.

    At every recorded step ``rho(x_{k+1}, x_{k+2}) <= phi_{f,M}(t) t + tol``
    with ``t = rho(x_k, x_{k+1})``.  A second run from *x1* (default: a point
    at distance 10 from *theta*, opposite to *x0*) must reach the same limit
    within ``10 tol``.

    Raises:
        E.InputError: *gauge* was computed for another map (``1402``), or
            the preconditions of :func:`iterate`.
    """
    if gauge.f is not f:
        raise E.InputError("Rakotch gauge was computed for a different map.", code="1402")
    require_positive("tol", tol, code="1400")
    max_iter = _max_iter(max_iter)
    model = f.model
    theta = model.validate(theta)
    x0 = model.validate(x0)
    if x1 is None:
        x1 = model.point_at_distance(theta, 10.0, model.reflect(theta, x0)).point

    primary = _picard(f, x0, tol, max_iter, theta, keep_residuals=True)
    second = _picard(f, x1, tol, max_iter, theta)
    primary.gauge_used = gauge
    second.gauge_used = gauge

    res = primary.residuals
    worst, worst_k = -math.inf, None
    for k in range(len(res) - 1):
        excess = res[k + 1] - gauge.step(res[k]) * res[k]
        if excess > worst:
            worst, worst_k = excess, k
    if worst_k is None:
        worst = 0.0
    gap = model.dist(primary.final_point, second.final_point)
    details = {"all_below_one": gauge.all_below_one, "c_M": gauge.gauges[-1]}
    checks = [
        Check("converged", "rakotch_convergence_audit", "Rakotch maps have convergent iterates",
              tol, primary.residual, "<=", 0.0, {"iterations": primary.iterations}),
        Check("step_gauge_bound", "rakotch_convergence_audit",
              "rho(f(x), f(y)) <= phi_{f,M}(rho(x, y)) rho(x, y)", tol, worst, "<=", 0.0,
              {"worst_step": worst_k}),
        Check("unique_limit", "rakotch_convergence_audit",
              "a Rakotch map has a unique fixed point", 10.0 * tol, gap, "<=", 0.0, details),
    ]
    log.debug("rakotch audit %r: residual %.3e, limit gap %.3e", f.root, primary.residual, gap)
    return RakotchAudit(primary, second, checks)
