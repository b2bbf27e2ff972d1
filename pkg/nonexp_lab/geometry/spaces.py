"""
Concrete unbounded geodesic space models.

Every model offers the same small surface:

- ``dist(x, y)``                       the metric
- ``combine(x, y, lam)``               the point (1-lam)x (+) lam y on the distinguished segment
- ``point_at_distance(frm, d, hint)``  ray shooting, returns a :class:`RayShot`
- ``axis_points(center, radius)``      deterministic extreme points of a ball
- ``perturb(x, sigma, rng)``           a random nearby point (refinement moves)
- ``ball_from_uniform(center, radius, U)``  map uniform draws into a ball

Points are 1-D ``float64`` numpy arrays.  For :class:`Hyperboloid2` they
are ambient Minkowski coordinates ``(x0, x1, x2)`` with
``x0^2 + x1^2 - x2^2 = -1`` and ``x2 > 0``.

Usage::

    from nonexp_lab.geometry.spaces import EuclideanSpace

    R1 = EuclideanSpace(1)
    R1.dist([0.0], [3.0])             # 3.0
    R1.combine([0.0], [2.0], 0.5)     # array([1.])
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..utility import config_manager
from ..utility import error as E
from ..utility.utility import get_logger

log = get_logger(__name__)


class ModelKind(Enum):
    """Implemented space models.

    Kinds compare equal to their (case insensitive) config names, so
    ``ModelKind.L1 == "l1"`` holds.
    """
    EUCLIDEAN = "euclidean"
    HALFSPACE = "halfspace"
    L1 = "l1"
    HYPERBOLOID = "hyperboloid2"

    def __eq__(self, other):
        if self is other:
            return True
        if isinstance(other, str):
            return other.lower() == self.value
        return False

    def __hash__(self):
        return hash(self.value)


@dataclass(frozen=True)
class RayShot:
    """Result of :meth:`SpaceModel.point_at_distance`.

    Attributes:
        point: the point at the requested distance.
        boundary_fallback: ``True`` when the hinted ray left the set and a
            boundary-parallel direction was used instead (HalfSpace only).
    """
    point: np.ndarray
    boundary_fallback: bool = False


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of :func:`nonexp_lab.geometry.sampling.verify_hyperbolicity`.

    ``violations`` breaks ``max_violation`` down per checked property.
    """
    samples: int
    max_violation: float
    tolerance: float
    passed: bool
    violations: dict


class SpaceModel:
    """Base class of all models.  Instances are immutable."""

    kind = None
    _tol_key = "tolerance_exact"

    def __init__(self, dim):
        if isinstance(dim, bool) or not isinstance(dim, (int, np.integer)) or dim < 1:
            raise E.InputError(f"Model dimension must be a positive integer, got {dim!r}.",
                               code="1005")
        self.dim = int(dim)
        self.tol = float(config_manager.load_setting_value(self._tol_key))

    # -- identity ---------------------------------------------------------

    @property
    def coord_dim(self):
        return self.dim

    def __eq__(self, other):
        return type(self) is type(other) and self.dim == other.dim

    def __hash__(self):
        return hash((type(self).__name__, self.dim))

    def __repr__(self):
        return f"{type(self).__name__}({self.dim})"

    def describe(self):
        """Config-style description, used in report echoes."""
        return {"kind": self.kind.value, "dim": self.dim}

    # -- validation ---------------------------------------------------------

    def validate(self, x):
        """Return *x* as a float array, raising if it is not a point of the model."""
        arr = np.asarray(x, dtype=float).reshape(-1)
        if arr.shape[0] != self.coord_dim:
            raise E.InputError(f"Dimension mismatch: expected {self.coord_dim} coordinates, "
                               f"got {arr.shape[0]}.", code="1000")
        if not np.all(np.isfinite(arr)):
            raise E.GeometryError(f"Point is not valid in model {self!r}: non-finite coordinates.",
                                  code="2000")
        return arr

    def contains(self, x):
        try:
            self.validate(x)
        except E.LabError:
            return False
        return True

    def origin(self):
        return np.zeros(self.coord_dim)

    # -- geometry, implemented by subclasses ---------------------------------

    def dist(self, x, y):
        raise NotImplementedError

    def dist_many(self, x, ys):
        """Distances from one point to each row of *ys*."""
        return np.array([self.dist(x, y) for y in np.atleast_2d(ys)])

    def dist_pairs(self, xs, ys):
        """Row-wise distances d(xs[i], ys[i])."""
        return np.array([self.dist(x, y) for x, y in zip(np.atleast_2d(xs), np.atleast_2d(ys))])

    def combine(self, x, y, lam):
        raise NotImplementedError

    def point_at_distance(self, frm, d, direction_hint=None):
        raise NotImplementedError

    def reflect(self, p, x):
        """The point symmetric to *x* through *p* (a hint pointing away from *x*)."""
        raise NotImplementedError

    def axis_points(self, center, radius):
        raise NotImplementedError

    def perturb(self, x, sigma, rng):
        raise NotImplementedError

    def ball_from_uniform(self, center, radius, uniforms):
        raise NotImplementedError

    # uniforms consumed per candidate point by ball_from_uniform
    def uniform_width(self):
        raise NotImplementedError

    # -- shared helpers ---------------------------------------------------

    def _check_lam(self, lam):
        if not (0.0 <= lam <= 1.0):
            raise E.InputError(f"Convex combination weight outside [0, 1]: {lam!r}", code="1001",
                               context={"lam": lam})

    def _check_distance(self, d):
        if not d >= 0:
            raise E.InputError(f"Negative distance requested: {d!r}", code="1002")


# ---------------------------------------------------------------------------
# Flat models: straight segments in R^dim
# ---------------------------------------------------------------------------

class _FlatSpace(SpaceModel):
    """R^dim with straight segments; subclasses pick the norm."""

    def _norm(self, v):
        raise NotImplementedError

    def _norm_rows(self, vs):
        raise NotImplementedError

    def dist(self, x, y):
        return float(self._norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)))

    def dist_many(self, x, ys):
        ys = np.atleast_2d(np.asarray(ys, dtype=float))
        return self._norm_rows(ys - np.asarray(x, dtype=float))

    def dist_pairs(self, xs, ys):
        return self._norm_rows(np.atleast_2d(np.asarray(xs, dtype=float)) - np.atleast_2d(np.asarray(ys, dtype=float)))

    def combine(self, x, y, lam):
        self._check_lam(lam)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if lam == 0.0:
            return x.copy()
        if lam == 1.0:
            return y.copy()
        return (1.0 - lam) * x + lam * y

    def _default_direction(self):
        e = np.zeros(self.dim)
        e[0] = 1.0
        return e

    def _direction(self, frm, hint):
        if hint is not None:
            u = np.asarray(hint, dtype=float) - frm
            n = self._norm(u)
            if n > 0:
                return u / n
        return self._default_direction()

    def point_at_distance(self, frm, d, direction_hint=None):
        self._check_distance(d)
        frm = self.validate(frm)
        if d == 0:
            return RayShot(frm.copy())
        u = self._direction(frm, direction_hint)
        return RayShot(frm + d * u)

    def reflect(self, p, x):
        return 2.0 * np.asarray(p, dtype=float) - np.asarray(x, dtype=float)

    def axis_points(self, center, radius):
        center = np.asarray(center, dtype=float)
        out = []
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = radius
            out.append(center + e)
            out.append(center - e)
        return out

    def perturb(self, x, sigma, rng):
        return np.asarray(x, dtype=float) + sigma * rng.standard_normal(self.dim)

    def uniform_width(self):
        return self.dim


class EuclideanSpace(_FlatSpace):
    """R^dim with the Euclidean norm."""

    kind = ModelKind.EUCLIDEAN

    def _norm(self, v):
        return np.linalg.norm(v)

    def _norm_rows(self, vs):
        return np.linalg.norm(vs, axis=1)

    def ball_from_uniform(self, center, radius, uniforms):
        # box candidates; the caller rejects points outside the ball
        return np.asarray(center, dtype=float) + radius * (2.0 * uniforms - 1.0)


class L1Space(_FlatSpace):
    """R^dim with the l1 metric and straight-line segments."""

    kind = ModelKind.L1

    def __init__(self, dim):
        super().__init__(dim)
        cap = int(config_manager.load_setting_value("l1_max_dim"))
        if self.dim > cap:
            raise E.InputError(f"Model dimension out of range: L1Space({self.dim}) exceeds the "
                               f"cap {cap}.", code="1005")

    def _norm(self, v):
        return np.abs(v).sum()

    def _norm_rows(self, vs):
        return np.abs(vs).sum(axis=1)

    def ball_from_uniform(self, center, radius, uniforms):
        return np.asarray(center, dtype=float) + radius * (2.0 * uniforms - 1.0)


class HalfSpace(EuclideanSpace):
    """The closed Euclidean half-space ``{x : x[-1] >= 0}``.

    Rays that would leave the set are redirected along the boundary
    (``RayShot.boundary_fallback``).  Sampled points below the boundary are
    reflected back, which never increases their distance to a center inside
    the set.
    """

    kind = ModelKind.HALFSPACE

    def validate(self, x):
        arr = super().validate(x)
        if arr[-1] < -self.tol:
            raise E.GeometryError(f"Point is not valid in model {self!r}: last coordinate "
                                  f"{arr[-1]!r} < 0.", code="2000")
        return arr

    def point_at_distance(self, frm, d, direction_hint=None):
        self._check_distance(d)
        frm = self.validate(frm)
        if d == 0:
            return RayShot(frm.copy())
        u = self._direction(frm, direction_hint)
        target = frm + d * u
        if target[-1] >= 0.0:
            return RayShot(target)
        tangent = u.copy()
        tangent[-1] = 0.0
        n = np.linalg.norm(tangent)
        if n > 0:
            tangent /= n
        else:
            tangent = np.zeros(self.dim)
            # dim 1 has no boundary-parallel direction; move inward instead
            tangent[0 if self.dim > 1 else -1] = 1.0
        log.debug("ray from %s left the half-space; boundary-parallel fallback", frm)
        return RayShot(frm + d * tangent, boundary_fallback=True)

    def axis_points(self, center, radius):
        center = np.asarray(center, dtype=float)
        out = []
        for p in super().axis_points(center, radius):
            if p[-1] < 0.0:
                p = self.point_at_distance(center, radius, p).point
            out.append(p)
        return out

    def perturb(self, x, sigma, rng):
        y = super().perturb(x, sigma, rng)
        y[-1] = abs(y[-1])
        return y

    def ball_from_uniform(self, center, radius, uniforms):
        pts = super().ball_from_uniform(center, radius, uniforms)
        pts[..., -1] = np.abs(pts[..., -1])
        return pts


# ---------------------------------------------------------------------------
# Hyperbolic plane, hyperboloid model
# ---------------------------------------------------------------------------

def minkowski(x, y):
    """The Lorentzian pairing x0*y0 + x1*y1 - x2*y2 (row-wise for 2-D input)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return x[..., 0] * y[..., 0] + x[..., 1] * y[..., 1] - x[..., 2] * y[..., 2]


class Hyperboloid2(SpaceModel):
    """The hyperbolic plane as the upper sheet of ``<x,x> = -1`` in R^{2,1}.

    Distances use ``2*asinh(sqrt(<x-y,x-y>)/2)``, which equals
    ``arccosh(-<x,y>)`` but keeps full precision for nearby points.
    Combinations use sinh interpolation followed by renormalization onto
    the sheet.
    """

    kind = ModelKind.HYPERBOLOID
    _tol_key = "tolerance_hyperbolic"

    def __init__(self, dim=2):
        if dim != 2:
            raise E.InputError(f"Model dimension out of range: Hyperboloid2 is 2-dimensional, "
                               f"got {dim!r}.", code="1005")
        super().__init__(2)

    def __repr__(self):
        return "Hyperboloid2()"

    @property
    def coord_dim(self):
        return 3

    def validate(self, x):
        arr = super().validate(x)
        form = minkowski(arr, arr)
        if arr[2] <= 0 or abs(form + 1.0) > 1e-9 * (1.0 + arr[2] * arr[2]):
            raise E.GeometryError(f"Point is not valid in model {self!r}: <x,x> = {form!r}, "
                                  f"x2 = {arr[2]!r}.", code="2000")
        return arr

    def origin(self):
        return np.array([0.0, 0.0, 1.0])

    @staticmethod
    def lift(x0, x1):
        """Point of the sheet above the planar coordinates (x0, x1)."""
        return np.array([x0, x1, math.sqrt(1.0 + x0 * x0 + x1 * x1)])

    @staticmethod
    def _normalize(p):
        return p / math.sqrt(-minkowski(p, p))

    def dist(self, x, y):
        diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        q = max(float(minkowski(diff, diff)), 0.0)
        return 2.0 * math.asinh(math.sqrt(q) / 2.0)

    def dist_many(self, x, ys):
        diff = np.atleast_2d(np.asarray(ys, dtype=float)) - np.asarray(x, dtype=float)
        q = np.maximum(minkowski(diff, diff), 0.0)
        return 2.0 * np.arcsinh(np.sqrt(q) / 2.0)

    def dist_pairs(self, xs, ys):
        diff = np.atleast_2d(np.asarray(xs, dtype=float)) - np.atleast_2d(np.asarray(ys, dtype=float))
        q = np.maximum(minkowski(diff, diff), 0.0)
        return 2.0 * np.arcsinh(np.sqrt(q) / 2.0)

    def combine(self, x, y, lam):
        self._check_lam(lam)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if lam == 0.0:
            return x.copy()
        if lam == 1.0:
            return y.copy()
        d = self.dist(x, y)
        if d < 1e-300:
            return x.copy()
        s = math.sinh(d)
        p = (math.sinh((1.0 - lam) * d) / s) * x + (math.sinh(lam * d) / s) * y
        return self._normalize(p)

    def _unit_tangent(self, x, toward):
        v = np.asarray(toward, dtype=float) + minkowski(x, toward) * x
        n2 = float(minkowski(v, v))
        if n2 <= 1e-24:
            return None
        return v / math.sqrt(n2)

    def frame(self, x):
        """An orthonormal (Minkowski) basis of the tangent plane at *x*."""
        t1 = self._unit_tangent(x, np.array([1.0, 0.0, 0.0]))
        if t1 is None:
            t1 = self._unit_tangent(x, np.array([0.0, 1.0, 0.0]))
        v = np.array([0.0, 1.0, 0.0]) + minkowski(x, [0.0, 1.0, 0.0]) * x
        v = v - minkowski(v, t1) * t1
        n2 = float(minkowski(v, v))
        if n2 <= 1e-24:
            v = np.array([1.0, 0.0, 0.0]) + minkowski(x, [1.0, 0.0, 0.0]) * x
            v = v - minkowski(v, t1) * t1
            n2 = float(minkowski(v, v))
        return t1, v / math.sqrt(n2)

    def _exp(self, x, u, d):
        return self._normalize(math.cosh(d) * x + math.sinh(d) * u)

    def point_at_distance(self, frm, d, direction_hint=None):
        self._check_distance(d)
        frm = self.validate(frm)
        if d == 0:
            return RayShot(frm.copy())
        u = None
        if direction_hint is not None:
            u = self._unit_tangent(frm, direction_hint)
        if u is None:
            u = self.frame(frm)[0]
        return RayShot(self._exp(frm, u, d))

    def reflect(self, p, x):
        p = np.asarray(p, dtype=float)
        x = np.asarray(x, dtype=float)
        return -x - 2.0 * minkowski(x, p) * p

    def axis_points(self, center, radius):
        center = np.asarray(center, dtype=float)
        t1, t2 = self.frame(center)
        return [self._exp(center, t, radius) for t in (t1, -t1, t2, -t2)]

    def perturb(self, x, sigma, rng):
        t1, t2 = self.frame(x)
        angle = rng.uniform(0.0, 2.0 * math.pi)
        step = abs(rng.normal(0.0, sigma))
        return self._exp(np.asarray(x, dtype=float), math.cos(angle) * t1 + math.sin(angle) * t2, step)

    def uniform_width(self):
        return 2

    def ball_from_uniform(self, center, radius, uniforms):
        # polar sampling, radius measured intrinsically
        center = np.asarray(center, dtype=float)
        t1, t2 = self.frame(center)
        out = []
        for u_r, u_a in np.atleast_2d(uniforms):
            r = radius * math.sqrt(u_r)
            a = 2.0 * math.pi * u_a
            out.append(self._exp(center, math.cos(a) * t1 + math.sin(a) * t2, r))
        return np.array(out).reshape(-1, 3)


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------

_MODELS = {
    ModelKind.EUCLIDEAN: EuclideanSpace,
    ModelKind.HALFSPACE: HalfSpace,
    ModelKind.L1: L1Space,
    ModelKind.HYPERBOLOID: Hyperboloid2,
}


def make_model(kind, dim=None):
    """Build a model from its config name, e.g. ``make_model("l1", 2)``."""
    for model_kind, cls in _MODELS.items():
        if model_kind == kind:
            if model_kind is ModelKind.HYPERBOLOID:
                return cls(2 if dim is None else dim)
            return cls(1 if dim is None else dim)
    raise E.GeometryError(f"Unknown model kind: {kind!r}", code="2001")


def dist(model, x, y):
    """Distance between two validated points of *model*."""
    return model.dist(model.validate(x), model.validate(y))


def combine(model, x, y, lam):
    """The point ``(1-lam)x (+) lam y`` of *model*."""
    return model.combine(model.validate(x), model.validate(y), lam)


def point_at_distance(model, frm, d, direction_hint=None):
    """Shoot a ray of length *d* from *frm*; returns a :class:`RayShot`."""
    return model.point_at_distance(frm, d, direction_hint)
