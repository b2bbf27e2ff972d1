"""
Map surgery: the explicit perturbation constructors.

=====================  ===============================================  ===========
constructor            what it does                                     claimed Lip
=====================  ===============================================  ===========
bump_lambda            1 on B(z,R), linear decay to 0 at R + 1/eps      eps (field)
radial_collapse        z on B(z,R), identity off B(z, R(1+1/eps))       1 + eps
spike_map              cone at x0 whose tip sits lam*t0 + eps from v    1
enlarge_modulus        f off a far ball, a spike of gap > lam*t0 on it  1
isometry_patch         close to f, isometric on micro-balls of a net    1
=====================  ===============================================  ===========

Every constructor returns a :class:`~nonexp_lab.mappings.NonexpMap` whose
constructor tree records the parameters, so ``repr(g)`` shows how a map
was assembled.  Glued maps expose ``piece_of(x)`` on their node, which
:func:`piecewise_lipschitz_check` uses to compare per-piece and global
sampled constants.

Usage::

    from nonexp_lab.geometry import EuclideanSpace
    from nonexp_lab.perturbations import radial_collapse

    R1 = EuclideanSpace(1)
    pi = radial_collapse(R1, [0.0], 1.0, 1.0)
    pi([0.5]), pi([1.5]), pi([3.0])      # [0.], [1.], [3.]
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..geometry.sampling import ball_sampler
from ..mappings import map_nodes as N
from ..mappings.nonexp_map import NonexpMap, compose, contract_toward, piecewise
from ..utility import config_manager
from ..utility import error as E
from ..utility.checks import Check
from ..utility.utility import get_logger, require_positive, require_unit_interval, rng_for

log = get_logger(__name__)


# ---------------------------------------------------------------------------
# Bump field
# ---------------------------------------------------------------------------

class BumpField:
    """``lambda_{z,R,eps}``: 1 on ``B(z, R)``, ``1 - eps (d - R)`` up to ``R + 1/eps``, then 0."""

    def __init__(self, model, z, R, eps):
        self.model = model
        self.z = np.array(z, dtype=float)
        self.R = float(R)
        self.eps = float(eps)

    @property
    def outer_radius(self):
        return self.R + 1.0 / self.eps

    def of_distance(self, d):
        """The field as a function of ``rho(x, z)``; works on arrays."""
        d = np.asarray(d, dtype=float)
        out = np.clip(1.0 - self.eps * (d - self.R), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def __call__(self, x):
        return self.of_distance(self.model.dist(x, self.z))

    def values(self, xs):
        return self.of_distance(self.model.dist_many(self.z, xs))

    def __repr__(self):
        return f"BumpField(z={N._fmt(self.z)}, R={self.R:.6g}, eps={self.eps:.6g})"


def bump_lambda(model, z, R, eps):
    """The bump field ``lambda_{z,R,eps}``, Lipschitz with constant *eps*.

    Raises:
        E.InputError: ``R <= 0`` or ``eps <= 0`` (code ``1300``).
    """
    if not (R > 0 and eps > 0):
        raise E.InputError(f"Bump parameters must be positive: R={R!r}, eps={eps!r}.",
                           code="1300")
    return BumpField(model, model.validate(z), R, eps)


# ---------------------------------------------------------------------------
# Nodes
# ---------------------------------------------------------------------------

class RadialCollapse(N.MapNode):
    """``x -> (1 - R l(x)/d) x (+) (R l(x)/d) z`` with ``d = rho(x, z)``, and ``z`` on ``B(z, R)``.

    ``l`` is the bump ``lambda_{z, R, eps/R}``.
    """

    kind = "radial_collapse"

    def __init__(self, model, z, R, eps):
        super().__init__(model)
        self.z = np.array(z, dtype=float)
        self.R = float(R)
        self.eps = float(eps)
        self.bump = BumpField(model, self.z, self.R, self.eps / self.R)

    @property
    def outer_radius(self):
        return self.R * (1.0 + 1.0 / self.eps)

    def evaluate(self, x):
        d = self.model.dist(x, self.z)
        if d < self.R:
            return self.z.copy()
        lam = self.bump.of_distance(d)
        if lam <= 0.0:
            return np.array(x, dtype=float)
        return self.model.combine(x, self.z, min(self.R * lam / d, 1.0))

    def piece_of(self, x):
        d = self.model.dist(x, self.z)
        return 0 if d < self.R else (1 if d < self.outer_radius else 2)

    def params(self):
        return {"z": self.z, "R": self.R, "eps": self.eps}


class Spike(N.Cone):
    """The cone of :func:`spike_map`: ``u`` at ``x0``, ``v`` off ``B(x0, t0)``."""

    kind = "spike"

    def __init__(self, model, x0, t0, v, u, lam):
        super().__init__(model, x0, t0, v, u)
        self.lam = float(lam)

    def piece_of(self, x):
        return 0 if self.model.dist(x, self.x0) < self.t0 else 1

    def params(self):
        return {"x0": self.x0, "t0": self.t0, "v": self.v, "lam": self.lam}


class NetCollapse(N.MapNode):
    """``f(pi_z(x))`` on ``B(z, R)`` for ``z`` in the net, ``f(x)`` elsewhere."""

    kind = "net_collapse"

    def __init__(self, child, points, collapses, R):
        super().__init__(child.model, (child,))
        self.points = np.array(points, dtype=float)
        self.collapses = list(collapses)
        self.R = float(R)

    def piece_of(self, x):
        d = self.model.dist_many(x, self.points)
        i = int(np.argmin(d))
        return i if d[i] < self.R else -1

    def evaluate(self, x):
        i = self.piece_of(x)
        if i < 0:
            return self.children[0].evaluate(x)
        return self.children[0].evaluate(self.collapses[i].evaluate(x))

    def params(self):
        return {"net_size": len(self.collapses), "R": self.R, "r": self.collapses[0].R}


class NetPatch(N.MapNode):
    """Isometric micro-spikes on ``B(z, r)`` for each net point ``z``, the child elsewhere.

    On ``B(z, r/2)`` the image is ``(1 - 3d/a) g1(z) (+) (3d/a) p_z``, on the
    annulus ``r/2 <= d < r`` the weight is ``3(r - d)/a``; ``rho(g1(z), p_z) = a/3``.
    """

    kind = "isometry_patch"

    def __init__(self, child, points, anchors, tips, a, r):
        super().__init__(child.model, (child,))
        self.points = np.array(points, dtype=float)
        self.anchors = np.array(anchors, dtype=float)
        self.tips = np.array(tips, dtype=float)
        self.a = float(a)
        self.r = float(r)

    def piece_of(self, x):
        d = self.model.dist_many(x, self.points)
        i = int(np.argmin(d))
        return i if d[i] < self.r else -1

    def evaluate(self, x):
        i = self.piece_of(x)
        if i < 0:
            return self.children[0].evaluate(x)
        d = self.model.dist(x, self.points[i])
        w = 3.0 * d / self.a if d < 0.5 * self.r else 3.0 * (self.r - d) / self.a
        return self.model.combine(self.anchors[i], self.tips[i], min(max(w, 0.0), 1.0))

    def params(self):
        return {"net_size": self.points.shape[0], "a": self.a, "r": self.r}


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def radial_collapse(model, z, R, eps):
    """``pi_{z,R,eps}``: collapses ``B(z, R)`` to ``z``, moves no point by more than *R*.

    Identity outside ``B(z, R(1 + 1/eps))``; tagged intermediate with
    ``claimed_lip = 1 + eps``.

    Raises:
        E.InputError: ``R <= 0`` or ``eps <= 0`` (code ``1300``).
    """
    if not (R > 0 and eps > 0):
        raise E.InputError(f"Bump parameters must be positive: R={R!r}, eps={eps!r}.",
                           code="1300")
    node = RadialCollapse(model, model.validate(z), R, eps)
    return NonexpMap(node, 1.0 + eps, intermediate=True)


def spike_map(model, x0, y0, v, t0, lam):
    """The map ``tau`` with ``rho(tau(x0), tau(y0)) > lam t0`` and ``tau = v`` off ``B(x0, t0)``.

    ``eps = (1 - lam) t0 / 2`` and the tip ``u`` lies at distance
    ``lam t0 + eps`` from *v*, shot away from *x0*.

    Raises:
        E.InputError: ``rho(x0, y0) != t0`` (``1301``) or *lam* outside (0, 1) (``1302``).
    """
    x0, y0, v = model.validate(x0), model.validate(y0), model.validate(v)
    require_positive("t0", t0)
    require_unit_interval("lam", lam, code="1302")
    d = model.dist(x0, y0)
    if abs(d - t0) > model.tol * max(1.0, t0):
        raise E.InputError(f"Points x0 and y0 are not at distance t0: rho={d!r}, t0={t0!r}.",
                           code="1301", context={"rho": d, "t0": t0})
    eps = 0.5 * (1.0 - lam) * t0
    u = model.point_at_distance(v, lam * t0 + eps, model.reflect(v, x0)).point
    return NonexpMap(Spike(model, x0, t0, v, u, lam), 1.0)


class ModulusLift(NamedTuple):
    """Result of :func:`enlarge_modulus`."""
    g: NonexpMap
    x0: np.ndarray
    y0: np.ndarray


def enlarge_modulus(f, z, gamma, lam, t0, R):
    """Nonexpansive ``g`` equal to *f* on ``B(z, R)`` with ``rho(g(x0), g(y0)) > lam t0``.

    ``delta = gamma/(1-gamma)``, ``S = t0/gamma``; ``x0`` is shot at distance
    ``R + S`` from *z* and ``y0`` sits on ``[z, x0]`` at distance *t0* from
    ``x0``.  ``g`` is the spike at ``x0`` inside ``B(x0, t0)`` and
    ``f o pi_{x0, t0, delta}`` outside; ``rho(g(x), f(x)) <= 2 t0`` everywhere.

    Raises:
        E.InputError: ``claimed_lip > 1 - gamma`` (``1303``), gamma outside
            (0, 1) (``1101``), lam outside (0, 1) (``1302``), nonpositive
            *t0* or *R* (``1102``).
    """
    model = f.model
    z = model.validate(z)
    require_unit_interval("gamma", gamma, code="1101")
    require_unit_interval("lam", lam, code="1302")
    require_positive("t0", t0)
    require_positive("R", R)
    if f.claimed_lip > 1.0 - gamma + 1e-12:
        raise E.InputError(f"Claimed Lipschitz constant too large for enlarge_modulus: "
                           f"{f.claimed_lip!r} > 1 - gamma = {1.0 - gamma!r}.", code="1303")
    delta = gamma / (1.0 - gamma)
    S = t0 / gamma
    shot = model.point_at_distance(z, R + S)
    if shot.boundary_fallback:
        log.warning("enlarge_modulus: ray from %s redirected along the boundary", z)
    x0 = shot.point
    y0 = model.combine(x0, z, t0 / (R + S))
    collapse = radial_collapse(model, x0, t0, delta)
    outside = compose(f, collapse)
    tau = spike_map(model, x0, y0, f(x0), t0, lam)

    def select(x):
        return 0 if model.dist(x, x0) <= t0 else 1

    g = piecewise(model, select, [tau, outside], 1.0, labels=["spike", "f o collapse"])
    log.debug("enlarge_modulus: x0=%s y0=%s delta=%.6g S=%.6g", x0, y0, delta, S)
    return ModulusLift(g, x0, y0)


# ---------------------------------------------------------------------------
# Separated nets
# ---------------------------------------------------------------------------

@dataclass
class SeparatedNet:
    """An ``a``-separated point set, maximal within the cloud it was drawn from.

    Attributes:
        model: the space model.
        points: net points as rows.
        a: the separation.
        maximal_within: description of the cloud the net is maximal in.
    """
    model: object
    points: np.ndarray
    a: float
    maximal_within: dict = field(default_factory=dict)

    def __len__(self):
        return self.points.shape[0]

    def min_separation(self):
        if len(self) < 2:
            return float("inf")
        return float(min(np.min(self.model.dist_many(p, self.points[i + 1:]))
                         for i, p in enumerate(self.points[:-1])))

    def inside(self, theta, n):
        """Points of the open ball ``B(theta, n)``."""
        if len(self) == 0:
            return self.points
        return self.points[self.model.dist_many(theta, self.points) < n]

    def covers(self, cloud):
        """Every cloud point within ``a`` of some net point (ties at exactly ``a`` allowed)."""
        cloud = np.atleast_2d(np.asarray(cloud, dtype=float))
        return all(np.min(self.model.dist_many(p, self.points)) <= self.a + self.model.tol
                   for p in cloud)


def greedy_separated_net(model, cloud, a):
    """Greedy pass in input order: keep a point iff it is at least *a* from every kept point.

    Raises:
        E.InputError: empty cloud (``1307``) or ``a <= 0`` (``1102``).
    """
    require_positive("a", a)
    cloud = np.asarray(cloud, dtype=float)
    if cloud.size == 0:
        raise E.InputError("Empty point cloud.", code="1307")
    cloud = cloud.reshape(-1, model.coord_dim)
    kept = [model.validate(cloud[0])]
    for p in cloud[1:]:
        if np.min(model.dist_many(p, np.array(kept))) >= a:
            kept.append(model.validate(p))
    return SeparatedNet(model, np.array(kept), float(a),
                        {"cloud_size": int(cloud.shape[0]), "order": "input"})


def _net_points(model, net, a):
    points = net.points if isinstance(net, SeparatedNet) else np.asarray(net, dtype=float)
    points = np.atleast_2d(points).reshape(-1, model.coord_dim)
    if points.shape[0] < 2:
        raise E.InputError("Net needs at least two points.", code="1305")
    points = np.array([model.validate(p) for p in points])
    for i, p in enumerate(points[:-1]):
        d = float(np.min(model.dist_many(p, points[i + 1:])))
        if d < a - model.tol:
            raise E.InputError(f"Net is not a-separated: distance {d!r} < a = {a!r}.",
                               code="1304", context={"index": i, "distance": d})
    return points


def isometry_patch(f, net, a, eps, theta):
    """Nonexpansive ``g`` isometric on ``B(z, eps a/32)`` around every net point ``z``.

    Three stages: ``g0`` collapses ``B(z, eps a/16)`` through
    ``pi_{z, eps a/16, eps/(4-eps)}`` (identity off ``B(z, a/4)``), ``g1``
    contracts ``g0`` toward ``g0(theta)`` with weight ``eps/4``, and the final
    map replaces ``g1`` on each ``B(z, eps a/16)`` by a spike of slope one
    toward a point ``p_z`` at distance ``a/3`` from ``g1(z)``.
    ``rho(f(x), g(x)) < (3 eps/4) max(1, rho(x, theta))``.

    Raises:
        E.InputError: *a* or *eps* outside (0, 1) (``1306``), fewer than two
            net points (``1305``) or a net that is not *a*-separated (``1304``).
    """
    model = f.model
    if not (0.0 < a < 1.0 and 0.0 < eps < 1.0):
        raise E.InputError(f"Parameters a and eps must lie in (0, 1): a={a!r}, eps={eps!r}.",
                           code="1306")
    theta = model.validate(theta)
    points = _net_points(model, net, a)
    r = eps * a / 16.0
    R = a / 4.0
    delta = eps / (4.0 - eps)

    collapses = [RadialCollapse(model, z, r, delta) for z in points]
    g0 = NonexpMap(NetCollapse(f.root, points, collapses, R), (1.0 + delta) * f.claimed_lip,
                   intermediate=True)
    g1 = contract_toward(g0, theta, eps / 4.0)
    away = g1(theta)
    anchors = np.array([g1(z) for z in points])
    tips = np.array([model.point_at_distance(c, a / 3.0, model.reflect(c, away)).point
                     for c in anchors])
    log.debug("isometry_patch over %d net points: r=%.6g R=%.6g delta=%.6g",
              len(points), r, R, delta)
    return NonexpMap(NetPatch(g1.root, points, anchors, tips, a, r), 1.0)


# ---------------------------------------------------------------------------
# Piecewise assembly audit
# ---------------------------------------------------------------------------

def _piece_nodes(root):
    return [node for node in root.walk() if hasattr(node, "piece_of") or node.kind == "piecewise"]


def _piece_label(node, x):
    if node.kind == "piecewise":
        return node.select(x)
    return node.piece_of(x)


def piecewise_lipschitz_check(f, center, radius, budget=None, seed=0):
    """Compare per-piece and global sampled Lipschitz constants of a glued map.

    Pairs are drawn in ``B(center, radius)`` (half of them short pairs).  A
    pair belongs to a piece when both ends get the same label from every
    glued node of the tree.  The glued map's sampled constant must not exceed
    ``max(claimed_lip, largest per-piece constant)`` plus the Lipschitz slack.

    Returns:
        list[Check]
    """
    model = f.model
    center = model.validate(center)
    require_positive("radius", radius, code="1003")
    if budget is None:
        budget = int(config_manager.load_setting_value("default_budget"))
    nodes = _piece_nodes(f.root)
    if not nodes:
        raise E.InputError("Map is not glued from pieces.", code="1100")
    slack = float(config_manager.load_setting_value("lipschitz_slack"))
    rng = rng_for(seed, 17)
    xs = ball_sampler(model, center, radius, budget, seed, include_extremes=True)
    ys = ball_sampler(model, center, radius, budget, seed + 1)
    half = budget // 2
    ys[:half] = [model.perturb(x, radius * 2.0 ** -rng.integers(2, 12), rng) for x in xs[:half]]
    d = model.dist_pairs(xs, ys)
    keep = d > 0
    xs, ys, d = xs[keep], ys[keep], d[keep]
    q = model.dist_pairs(f.evaluate_many(xs), f.evaluate_many(ys)) / d

    labels_x = [tuple(_piece_label(n, x) for n in nodes) for x in xs]
    labels_y = [tuple(_piece_label(n, y) for n in nodes) for y in ys]
    per_piece = {}
    for lx, ly, value in zip(labels_x, labels_y, q):
        if lx == ly:
            per_piece[lx] = max(per_piece.get(lx, 0.0), float(value))
    local = max(per_piece.values(), default=0.0)
    bound = max(f.claimed_lip, local)
    glob = float(np.max(q)) if q.size else 0.0
    anchor = "Lipschitz on each piece of a geodesic cover implies Lipschitz globally"
    return [
        Check("pieces_within_claim", "piecewise_lipschitz_check", anchor, f.claimed_lip, local,
              "<=", slack, {"pieces": len(per_piece)}),
        Check("global_within_pieces", "piecewise_lipschitz_check", anchor, bound, glob, "<=",
              slack, {"pairs": int(q.size)}),
    ]
