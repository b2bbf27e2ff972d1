"""
Ball sampling and the axiom verifier.

All suprema in the package are estimated over points produced here.
Sampling is deterministic for a fixed seed.  The ``quasi_random`` setting
(or the ``quasi`` argument) swaps the pseudo-random uniforms for a
scrambled Sobol sequence from ``scipy.stats.qmc``.
"""

import math
import warnings

import numpy as np
from scipy.stats import norm, qmc

from ..utility import config_manager
from ..utility import error as E
from ..utility.utility import get_logger, rng_for
from .spaces import AxiomReport, Hyperboloid2, L1Space

log = get_logger(__name__)

# flat models above this dimension sample radially instead of by rejection
REJECTION_MAX_DIM = 3


class UniformSource:
    """Rows of uniforms in [0, 1)^width, pseudo-random or Sobol."""

    def __init__(self, width, seed, quasi=False):
        self.width = width
        self.quasi = quasi
        if quasi:
            self._engine = qmc.Sobol(d=width, scramble=True, seed=np.random.default_rng(seed))
        else:
            self._rng = np.random.default_rng(seed)

    def draw(self, n):
        if n <= 0:
            return np.empty((0, self.width))
        if self.quasi:
            with warnings.catch_warnings():
                # Sobol balance warnings for non powers of two
                warnings.simplefilter("ignore", UserWarning)
                return self._engine.random(n)
        return self._rng.random((n, self.width))


def _resolve_quasi(quasi):
    if quasi is None:
        return bool(config_manager.load_setting_value("quasi_random"))
    return bool(quasi)


def _flat_radial(model, center, radius, source, count):
    # direction uniform on the unit sphere of the model norm, radius ~ U^(1/d)
    d = model.dim
    u = source.draw(count)
    if isinstance(model, L1Space):
        expo = -np.log1p(-np.clip(u[:, :d], 0.0, 1.0 - 1e-16))
        signs = np.where(u[:, d:2 * d] < 0.5, -1.0, 1.0)
        direction = signs * expo / expo.sum(axis=1, keepdims=True)
    else:
        g = norm.ppf(np.clip(u[:, :d], 1e-12, 1.0 - 1e-12))
        direction = g / np.linalg.norm(g, axis=1, keepdims=True)
    rad = radius * u[:, -1] ** (1.0 / d)
    pts = np.asarray(center, dtype=float) + rad[:, None] * direction
    if model.kind == "halfspace":
        pts[:, -1] = np.abs(pts[:, -1])
    return pts


def _flat_rejection(model, center, radius, source, count):
    accepted = []
    total = 0
    while total < count:
        batch = model.ball_from_uniform(center, radius, source.draw(max(2 * (count - total), 16)))
        keep = batch[model.dist_many(center, batch) <= radius]
        accepted.append(keep)
        total += keep.shape[0]
    return np.concatenate(accepted)[:count]


def ball_sampler(model, center, radius, count, seed, quasi=None, include_extremes=False):
    """Sample points of the closed ball ``B(center, radius)`` of *model*.

    Args:
        model:            the space model.
        center:           ball center.
        radius:           positive radius.
        count:            number of points returned.
        seed:             integer seed; identical seeds give identical points.
        quasi:            Sobol sampling; ``None`` follows the ``quasi_random`` setting.
        include_extremes: put the center and the axis extreme points first.

    Returns:
        ndarray of shape ``(count, model.coord_dim)``.

    Raises:
        E.InputError: If *radius* is not positive (code ``1003``).
    """
    if not radius > 0:
        raise E.InputError(f"Radius must be positive: {radius!r}", code="1003")
    center = model.validate(center)
    if count <= 0:
        return np.empty((0, model.coord_dim))

    head = []
    if include_extremes:
        head = [center] + list(model.axis_points(center, radius))
        if len(head) >= count:
            return np.array(head[:count])
    rest = count - len(head)

    quasi = _resolve_quasi(quasi)
    if isinstance(model, Hyperboloid2):
        pts = model.ball_from_uniform(center, radius, UniformSource(2, seed, quasi).draw(rest))
    elif model.dim <= REJECTION_MAX_DIM:
        pts = _flat_rejection(model, center, radius, UniformSource(model.dim, seed, quasi), rest)
    else:
        width = 2 * model.dim + 1 if isinstance(model, L1Space) else model.dim + 1
        pts = _flat_radial(model, center, radius, UniformSource(width, seed, quasi), rest)
    if head:
        pts = np.concatenate([np.array(head), pts])
    return pts


# ---------------------------------------------------------------------------
# Axiom verifier
# ---------------------------------------------------------------------------

def default_sample_radius(model):
    """Sampling radius for axiom checks: moderate so rounding stays small."""
    return 5.0 if isinstance(model, Hyperboloid2) else 10.0


def verify_hyperbolicity(model, sample_count, seed, tolerance=None, radius=None):
    """Check the convex-combination axioms of *model* on random samples.

    For every sample ``(x, y, z, lam, mu)`` four violations are measured:

    - ``segment_distance``:     | d(x, c) - lam d(x,y) | and | d(c, y) - (1-lam) d(x,y) |
      with ``c = (1-lam)x (+) lam y``
    - ``hyperbolic_inequality``: d(c, (1-lam)x (+) lam z) - lam d(y, z), positive part
    - ``two_combination``:      | d((1-mu)x (+) mu y, c) - |lam - mu| d(x,y) |
    - ``ball_convexity``:       d(z, c) - max(d(z,x), d(z,y)), positive part

    Args:
        model:        the space model.
        sample_count: number of samples, at least 1.
        seed:         integer seed.
        tolerance:    pass threshold; defaults to ``model.tol``.
        radius:       sampling radius around the origin.

    Returns:
        AxiomReport: ``passed`` iff the largest violation is within tolerance.
    """
    if sample_count < 1:
        raise E.InputError("Sample count must be at least 1.", code="1004")
    tol = model.tol if tolerance is None else float(tolerance)
    radius = default_sample_radius(model) if radius is None else radius
    rng = rng_for(seed, 1)

    pts = ball_sampler(model, model.origin(), radius, 3 * sample_count, seed)
    lams = rng.random((sample_count, 2))
    # endpoints are part of the axioms too
    lams[::17, 0] = 0.0
    lams[::19, 1] = 1.0

    worst = {"segment_distance": 0.0, "hyperbolic_inequality": 0.0,
             "two_combination": 0.0, "ball_convexity": 0.0}
    for i in range(sample_count):
        x, y, z = pts[3 * i], pts[3 * i + 1], pts[3 * i + 2]
        lam, mu = float(lams[i, 0]), float(lams[i, 1])
        dxy = model.dist(x, y)
        c = model.combine(x, y, lam)
        seg = max(abs(model.dist(x, c) - lam * dxy), abs(model.dist(c, y) - (1.0 - lam) * dxy))
        hyp = model.dist(c, model.combine(x, z, lam)) - lam * model.dist(y, z)
        two = abs(model.dist(model.combine(x, y, mu), c) - abs(lam - mu) * dxy)
        ball = model.dist(z, c) - max(model.dist(z, x), model.dist(z, y))
        worst["segment_distance"] = max(worst["segment_distance"], seg)
        worst["hyperbolic_inequality"] = max(worst["hyperbolic_inequality"], hyp)
        worst["two_combination"] = max(worst["two_combination"], two)
        worst["ball_convexity"] = max(worst["ball_convexity"], ball)

    max_violation = max(worst.values())
    log.debug("%r axioms: %d samples, max violation %.3e", model, sample_count, max_violation)
    return AxiomReport(samples=sample_count, max_violation=max_violation, tolerance=tol,
                       passed=max_violation <= tol, violations=worst)


def antipodal_pairs(model, center, radius):
    """Pairs of opposite axis points of a ball (distance ``2*radius`` on flat models)."""
    pts = model.axis_points(center, radius)
    return [(pts[i], pts[i + 1]) for i in range(0, len(pts) - 1, 2)]


def unit_directions(model, center, count, rng):
    """Random hint points around *center* (one ray direction each)."""
    return [model.perturb(center, 1.0, rng) for _ in range(count)]


def nearest_index(model, x, points):
    """Index and distance of the point of *points* closest to *x*."""
    d = model.dist_many(x, points)
    i = int(np.argmin(d))
    return i, float(d[i])


def geometric_scales(r, levels):
    """``r, r/2, ..., r*2^-levels``."""
    return [r * math.ldexp(1.0, -k) for k in range(levels + 1)]
