"""
Porosity witnesses: a center map, a radius and a good-set predicate.

A witness built from a base map ``f`` and a radius ``r`` consists of a
center ``g`` inside ``B(f, r)`` and a radius ``delta`` such that every map
of ``B(g, delta)`` satisfies the predicate.  :func:`verify_witness` checks
the center distance and evaluates the predicate on generated members of the
witness ball (see :mod:`members`).

=================  =========================  ======================================
kind               builder                    predicate
=================  =========================  ======================================
ball_invariance    ball_invariance_witness    h maps B(theta, M_f) into itself
rakotch            rakotch_witness            sampled c_{h,n} < 1
modcont            modcont_witness            rho(h(x0), h(y0)) > mu t0
shrink             shrink_witness             h shrinks all pairs near (x, y)
local_lipschitz    local_lipschitz_witness    local constant at net points > lam
=================  =========================  ======================================

Usage::

    metric = MapMetric.series([0.0], make_log_gauge())
    w = ball_invariance_witness(affine(R1, 1.0, 1.0), 0.5, [0.0], metric)
    w.params["M_f"]                              # 24.0
    verify_witness(w, member_count=100, seed=1).passed
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..fixpoint.iteration import ball_invariance_check
from ..geometry.sampling import ball_sampler
from ..mappings.estimators import rakotch_gauge_estimate
from ..mappings.nonexp_map import contract_toward, require_nonexpansive
from ..metrics.gauges import make_porosity_power
from ..metrics.map_metrics import MapMetric, pointwise_metric, series_metric, weighted_sup_metric
from ..utility import config_manager
from ..utility import error as E
from ..utility.checks import Check, all_passed
from ..utility.utility import get_logger, parallel_map, require_positive, require_unit_interval, sub_seed
from .constructors import SeparatedNet, enlarge_modulus, isometry_patch
from .members import generate_member

log = get_logger(__name__)

WITNESS_KINDS = ("ball_invariance", "rakotch", "modcont", "shrink", "local_lipschitz")
# halvings of gamma allowed while searching a shrink-witness center
SHRINK_MAX_HALVINGS = 60


def _setting(key):
    return float(config_manager.load_setting_value(key))


def _budget(budget):
    return int(config_manager.load_setting_value("default_budget")) if budget is None else int(budget)


def _as_list(x):
    return np.asarray(x, dtype=float).tolist()


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------

class BallInvariance:
    """``h(B(theta, M)) in B(theta, M)``."""

    name = "ball_invariance"
    anchor = "maps near f_gamma send B(theta, M_f) into itself"

    def __init__(self, theta, M):
        self.theta = np.asarray(theta, dtype=float)
        self.M = float(M)

    def points(self):
        return [self.theta]

    def evaluate(self, h, budget, seed):
        check = ball_invariance_check(h, self.theta, self.M, budget, seed)
        return Check(self.name, "verify_witness", self.anchor, self.M,
                     self.M + check.worst_margin, "<=", h.model.tol * max(1.0, self.M))

    def describe(self):
        return {"predicate": self.name, "M": self.M}


class RakotchGaugeBelowOne:
    """Sampled ``c_{h,n} <= bound`` and strictly below one."""

    name = "rakotch_gauge_below_one"
    anchor = "maps near a contraction have c_{h,n} < 1"

    def __init__(self, theta, n, bound):
        self.theta = np.asarray(theta, dtype=float)
        self.n = int(n)
        self.bound = float(bound)

    def points(self):
        return [self.theta]

    def evaluate(self, h, budget, seed):
        est = rakotch_gauge_estimate(h, self.theta, self.n, budget, seed)
        bound = min(self.bound + _setting("lipschitz_slack"), 1.0)
        return Check(self.name, "verify_witness", self.anchor, bound, est.value, "<",
                     _setting("strictness_slack"), {"n": self.n, "pairs": est.pairs_tested})

    def describe(self):
        return {"predicate": self.name, "n": self.n, "bound": self.bound}


class ModulusExceeds:
    """``rho(h(x0), h(y0)) > mu t0``."""

    name = "modulus_exceeds"
    anchor = "maps near the spiked center have modulus above mu t0 at t0"

    def __init__(self, t0, mu, x0, y0):
        self.t0 = float(t0)
        self.mu = float(mu)
        self.x0 = np.asarray(x0, dtype=float)
        self.y0 = np.asarray(y0, dtype=float)

    def points(self):
        return [self.x0, self.y0]

    def evaluate(self, h, budget, seed):
        gap = h.model.dist(h(self.x0), h(self.y0))
        return Check(self.name, "verify_witness", self.anchor, self.mu * self.t0, gap, ">",
                     _setting("strictness_slack"), {"t0": self.t0})

    def describe(self):
        return {"predicate": self.name, "t0": self.t0, "mu": self.mu,
                "x0": _as_list(self.x0), "y0": _as_list(self.y0)}


class ShrinkPair:
    """``rho(h(xi), h(eta)) < rho(xi, eta)`` for sampled ``xi`` near ``x``, ``eta`` near ``y``."""

    name = "shrink_pair"
    anchor = "maps near a strict contraction shrink every pair near (x, y)"

    def __init__(self, x, y, r_pair):
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.r_pair = float(r_pair)

    def points(self):
        return [self.x, self.y]

    def evaluate(self, h, budget, seed):
        model = h.model
        count = max(1, budget // 2)
        xs = ball_sampler(model, self.x, self.r_pair, count, seed, include_extremes=True)
        ys = ball_sampler(model, self.y, self.r_pair, count, seed + 1, include_extremes=True)
        q = model.dist_pairs(h.evaluate_many(xs), h.evaluate_many(ys)) / model.dist_pairs(xs, ys)
        return Check(self.name, "verify_witness", self.anchor, 1.0, float(np.max(q)), "<",
                     _setting("strictness_slack"), {"pairs": int(q.size)})

    def describe(self):
        return {"predicate": self.name, "x": _as_list(self.x), "y": _as_list(self.y),
                "r_pair": self.r_pair}


class LocalLipAbove:
    """``rho(h(y_z), h(z)) >= ((1 + lam)/2) rho(y_z, z)`` at every net point ``z``."""

    name = "local_lip_above"
    anchor = "maps near the isometry patch have local constant above lam on the net"

    def __init__(self, lam, points, partners):
        self.lam = float(lam)
        self.net = np.asarray(points, dtype=float)
        self.partners = np.asarray(partners, dtype=float)

    def points(self):
        return list(self.net) + list(self.partners)

    def evaluate(self, h, budget, seed):
        model = h.model
        q = model.dist_pairs(h.evaluate_many(self.partners), h.evaluate_many(self.net)) \
            / model.dist_pairs(self.partners, self.net)
        return Check(self.name, "verify_witness", self.anchor, 0.5 * (1.0 + self.lam),
                     float(np.min(q)), ">=", _setting("lipschitz_slack"),
                     {"net_points": int(q.size)})

    def describe(self):
        return {"predicate": self.name, "lam": self.lam, "net_points": int(self.net.shape[0])}


# ---------------------------------------------------------------------------
# Witness
# ---------------------------------------------------------------------------

@dataclass
class PorosityWitness:
    """A center map ``center_g`` with ``d(base_f, center_g) < r`` and a witness radius.

    Attributes:
        kind: one of :data:`WITNESS_KINDS`.
        base_f: the base map.
        r: the base radius.
        center_g: the center of the witness ball.
        radius: the witness radius; ``0.0`` when it underflows (see ``params["radius_log2"]``).
        predicate: the good-set predicate every member must satisfy.
        metric: the :class:`MapMetric` both balls are taken in.
        params: every constant of the construction.
        theta: base point of the construction.
        action_radius: the predicate only looks at points of ``B(theta, action_radius)``.
    """
    kind: str
    base_f: object
    r: float
    center_g: object
    radius: float
    predicate: object
    metric: MapMetric
    params: dict = field(default_factory=dict)
    theta: np.ndarray = None
    action_radius: float = 1.0

    @property
    def degenerate(self):
        return self.radius <= 0.0

    @property
    def radius_log2(self):
        return self.params.get("radius_log2", math.log2(self.radius) if self.radius > 0 else -math.inf)

    def describe(self):
        return {"kind": self.kind, "r": self.r, "radius": self.radius,
                "radius_log2": self.radius_log2, "metric": self.metric.describe(),
                **self.predicate.describe()}


def _finish(kind, f, r, center, radius, radius_log2, predicate, metric, params, theta, action):
    params = dict(params)
    params["radius_log2"] = radius_log2
    if radius <= 0.0:
        log.warning("%s witness radius underflows: log2(radius) = %.6g; members collapse to the "
                    "center", kind, radius_log2)
    log.debug("%s witness: radius %.6g, params %s", kind, radius, params)
    return PorosityWitness(kind, f, float(r), center, float(radius), predicate, metric, params,
                           np.asarray(theta, dtype=float), float(action))


def _gauge_radius(gauge, t):
    """``phi_inv(t)`` and its log2, exact for the log gauge when the value underflows."""
    value = gauge.phi_inv(t)
    if gauge.kind == "log":
        return value, -1.0 / t
    return value, math.log2(value) if value > 0 else -math.inf


def _power_radius(s, t):
    value = make_porosity_power(s).phi_inv(t)
    return value, s * math.log2(t)


def _check_metric(metric, theta, kinds, model):
    if metric.kind not in kinds:
        raise E.WitnessError(f"Metric kind not supported by this witness: {metric.kind!r}",
                             code="4004", context={"kind": metric.kind})
    if metric.kind != "pointwise" and model.dist(metric.theta, theta) > model.tol:
        raise E.WitnessError("Metric kind not supported by this witness: base point differs "
                             "from theta", code="4004")


def _check_r(r):
    if not 0.0 < r < 1.0:
        raise E.WitnessError(f"Radius r outside admissible range: {r!r}", code="4000",
                             context={"r": r})


def _series_admissible(gauge, r, scale):
    """``(r0, relaxed)`` for a series witness at *r*.

    ``r < r0 = min(1, phi(eta))`` is admissible outright.  Larger ``r < 1``
    are accepted when ``phi_inv(r) <= r`` and ``scale <= phi(eta)``.
    """
    _check_r(r)
    r0 = gauge.r0
    if r < r0:
        return r0, False
    if gauge.phi_inv(r) <= r and scale <= gauge.phi(gauge.eta):
        return r0, True
    raise E.WitnessError(f"Radius r outside admissible range: r={r!r}, r0={r0!r}", code="4000",
                         context={"r": r, "r0": r0})


def _prepare(f, theta, metric, kinds):
    require_nonexpansive(f, code="4002")
    theta = f.model.validate(theta)
    _check_metric(metric, theta, kinds, f.model)
    return theta


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def ball_invariance_witness(f, r, theta, metric):
    """Witness for the set of maps leaving some ball around *theta* invariant.

    Center ``f_gamma = contract_toward(f, theta, gamma)`` with
    ``gamma = r/(3 C_phi)`` (series) or ``r/3`` (weighted), and
    ``M_f = (1 + rho(f(theta), theta))/gamma``.  The series radius is
    ``phi_inv(alpha_tilde r)`` when the gauge satisfies (C5), else
    ``phi_inv((alpha r)^2)``; both are stored.  The weighted radius is
    ``(alpha_s r)^s``.

    Raises:
        E.WitnessError: r outside the admissible range (``4000``), base map
            not nonexpansive (``4002``), pointwise metric (``4004``).
    """
    theta = _prepare(f, theta, metric, ("series", "weighted"))
    model = f.model
    rho = model.dist(f(theta), theta)
    params = {"rho_f_theta": rho}
    if metric.kind == "series":
        gauge = metric.gauge
        C = gauge.C_phi
        gamma = r / (3.0 * C)
        M = (1.0 + rho) / gamma
        r0, relaxed = _series_admissible(gauge, r, 1.0 / M)
        alpha = 1.0 / math.sqrt(12.0 * C * (rho + 2.0))
        alpha_tilde = 1.0 / (12.0 * C * (rho + 2.0) + 1.0)
        sqrt_radius, sqrt_log2 = _gauge_radius(gauge, (alpha * r) ** 2)
        c5_radius, c5_log2 = _gauge_radius(gauge, alpha_tilde * r)
        use_c5 = bool(gauge.flags.get("C5"))
        radius, radius_log2 = (c5_radius, c5_log2) if use_c5 else (sqrt_radius, sqrt_log2)
        params.update(alpha=alpha, alpha_tilde=alpha_tilde, radius_sqrt_phi=sqrt_radius,
                      radius_sqrt_phi_log2=sqrt_log2, radius_c5=c5_radius, radius_c5_log2=c5_log2,
                      radius_used="c5" if use_c5 else "sqrt_phi", r0=r0, relaxed=relaxed,
                      center_analytic=C * gamma)
    else:
        _check_r(r)
        gamma = r / 3.0
        M = (1.0 + rho) / gamma
        alpha_s = 1.0 / (6.0 * (2.0 + rho))
        radius, radius_log2 = _power_radius(metric.s, alpha_s * r)
        params.update(alpha_s=alpha_s, radius_used="psi_s", r0=1.0, relaxed=False,
                      center_analytic=gamma)
    params.update(gamma=gamma, M_f=M)
    center = contract_toward(f, theta, gamma)
    return _finish("ball_invariance", f, r, center, radius, radius_log2,
                   BallInvariance(theta, M), metric, params, theta, M)


def rakotch_witness(f, r, n, theta, metric):
    """Witness for the maps with ``c_{h,n} < 1``.

    ``gamma`` is the midpoint of ``(r/(2 C_phi), r/C_phi)`` (series) or of
    ``(r/2, r)`` (weighted); the radius is ``alpha r`` with
    ``alpha = phi_inv(1/n)/(8 n C_phi)`` or ``1/(4 n (1 + n^s))``.
    """
    theta = _prepare(f, theta, metric, ("series", "weighted"))
    _check_r(r)
    require_positive("n", n)
    n = int(n)
    if metric.kind == "series":
        C = metric.gauge.C_phi
        alpha = metric.gauge.phi_inv(1.0 / n) / (8.0 * n * C)
        gamma = 0.75 * r / C
        bound = 1.0 - gamma + r / (2.0 * C)
        analytic = C * gamma
    else:
        alpha = 1.0 / (4.0 * n * (1.0 + n ** metric.s))
        gamma = 0.75 * r
        bound = 1.0 - gamma + 0.5 * r
        analytic = gamma
    radius = alpha * r
    params = {"alpha": alpha, "gamma": gamma, "n": n, "bound": bound, "center_analytic": analytic}
    center = contract_toward(f, theta, gamma)
    return _finish("rakotch", f, r, center, radius, math.log2(radius),
                   RakotchGaugeBelowOne(theta, n, bound), metric, params, theta, float(n))


def modcont_witness(f, r, t0, mu, theta, metric):
    """Witness for the maps whose modulus of continuity at *t0* exceeds ``mu t0``.

    ``eps = min(t0 (1 - mu)/8, 1/2)``, ``lam = (1 + mu)/2``.  Series case:
    ``gamma = r/(4 C_phi)``, ``N = ceil(4 C_phi t0 / r)``,
    ``alpha = eps/(4 + 16 t0 C_phi)``, radius ``phi_inv(alpha r)``.  Weighted
    case: ``gamma = r/2``, ``R = (4 t0)^(1/s)/r``,
    ``alpha = eps^(1/s)/(1 + 2 t0 + (4 t0)^(1/s))``, radius ``(alpha r)^s``.
    The center is :func:`enlarge_modulus` applied to ``contract_toward(f, theta, gamma)``.
    """
    theta = _prepare(f, theta, metric, ("series", "weighted"))
    _check_r(r)
    require_positive("t0", t0)
    require_unit_interval("mu", mu, code="1302")
    eps = min(t0 * (1.0 - mu) / 8.0, 0.5)
    lam = 0.5 * (1.0 + mu)
    if metric.kind == "series":
        gauge = metric.gauge
        C = gauge.C_phi
        N = math.ceil(4.0 * C * t0 / r)
        r0, relaxed = _series_admissible(gauge, r, 1.0 / (4.0 * N))
        gamma = r / (4.0 * C)
        alpha = eps / (4.0 + 16.0 * t0 * C)
        R = float(N)
        radius, radius_log2 = _gauge_radius(gauge, alpha * r)
        analytic = C * gamma + min(1.0, 2.0 * t0) * gauge.sum_from(N)
        params = {"N": N, "r0": r0, "relaxed": relaxed}
    else:
        s = metric.s
        gamma = 0.5 * r
        R = (4.0 * t0) ** (1.0 / s) / r
        alpha = eps ** (1.0 / s) / (1.0 + 2.0 * t0 + (4.0 * t0) ** (1.0 / s))
        radius, radius_log2 = _power_radius(s, alpha * r)
        analytic = gamma + 2.0 * t0 / (1.0 + R ** s)
        params = {}
    f_tilde = contract_toward(f, theta, gamma)
    g, x0, y0 = enlarge_modulus(f_tilde, theta, gamma, lam, t0, R)
    params.update(eps=eps, lam=lam, gamma=gamma, alpha=alpha, R=R, x0=_as_list(x0),
                  y0=_as_list(y0), center_analytic=analytic)
    action = max(f.model.dist(theta, x0), f.model.dist(theta, y0)) + t0
    return _finish("modcont", f, r, g, radius, radius_log2, ModulusExceeds(t0, mu, x0, y0),
                   metric, params, theta, action)


def shrink_witness(f, x, y, dense_seq, metric=None, r=0.5, gamma=0.1):
    """Witness for the maps shrinking every pair of ``B(x, r_pair) x B(y, r_pair)``.

    The center is ``contract_toward(f, z_1, gamma)``, halving *gamma* until
    ``d_z(f, g) < r``.  With ``L = g.claimed_lip`` and
    ``r_pair = (1 - L) rho(x, y)/10``, dense points ``z_m1``, ``z_m2`` closer
    than ``r_pair`` to *x* and *y* fix the radius
    ``2^-max(m1, m2) r_pair/(1 + r_pair)``.

    Raises:
        E.InputError: ``x == y`` (``1308``).
        E.WitnessError: no dense point near *x* or *y* within the search
            limit (``4001``), non-pointwise metric (``4004``).
    """
    require_nonexpansive(f, code="4002")
    model = f.model
    x, y = model.validate(x), model.validate(y)
    if metric is None:
        metric = MapMetric.pointwise(dense_seq)
    _check_metric(metric, None, ("pointwise",), model)
    if model.dist(x, y) <= model.tol:
        raise E.InputError("Shrink witness needs x != y.", code="1308")
    _check_r(r)
    require_unit_interval("gamma", gamma, code="1101")
    theta = dense_seq[0]
    center = contract_toward(f, theta, gamma)
    d = pointwise_metric(f, center, dense_seq, metric.N)
    for _ in range(SHRINK_MAX_HALVINGS):
        if d.upper < r:
            break
        gamma *= 0.5
        center = contract_toward(f, theta, gamma)
        d = pointwise_metric(f, center, dense_seq, metric.N)
    L = center.claimed_lip
    r_pair = (1.0 - L) * model.dist(x, y) / 10.0
    limit = int(config_manager.load_setting_value("dense_search_limit"))
    m1 = dense_seq.find_near(x, r_pair, limit) + 1
    m2 = dense_seq.find_near(y, r_pair, limit) + 1
    m = max(m1, m2)
    q = r_pair / (1.0 + r_pair)
    radius = math.ldexp(q, -m)
    params = {"gamma": gamma, "L": L, "r_pair": r_pair, "m1": m1, "m2": m2,
              "center_distance": d.upper}
    action = max(model.dist(theta, x), model.dist(theta, y)) + r_pair
    return _finish("shrink", f, r, center, radius, math.log2(q) - m, ShrinkPair(x, y, r_pair),
                   metric, params, theta, action)


def local_lipschitz_witness(f, r, n, lam, net, a, theta, metric):
    """Witness for the maps whose local constant exceeds *lam* at every net point of ``B(theta, n)``.

    Series case ``alpha = a (1 - lam) 2^-9 phi_inv(1/n)/C_phi`` and
    ``eps = r/C_phi``; weighted case ``alpha = a (1 - lam) 2^-8/(1 + n^s)`` and
    ``eps = r``.  The center is :func:`isometry_patch` of *f* over the net
    points in the closed ball, the radius ``alpha r``.

    Raises:
        E.WitnessError: fewer than two net points in the ball (``4005``).
    """
    theta = _prepare(f, theta, metric, ("series", "weighted"))
    model = f.model
    _check_r(r)
    require_positive("n", n)
    require_unit_interval("lam", lam, code="1302")
    if not 0.0 < a < 1.0:
        raise E.InputError(f"Parameters a and eps must lie in (0, 1): a={a!r}", code="1306")
    points = net.points if isinstance(net, SeparatedNet) else np.asarray(net, dtype=float)
    points = points.reshape(-1, model.coord_dim)
    inside = points[model.dist_many(theta, points) <= n + model.tol] if len(points) else points
    if len(inside) < 2:
        raise E.WitnessError("Net has no point inside the ball B(theta, n).", code="4005",
                             context={"inside": int(len(inside)), "n": n})
    if metric.kind == "series":
        C = metric.gauge.C_phi
        alpha = a * (1.0 - lam) * 2.0 ** -9 * metric.gauge.phi_inv(1.0 / n) / C
        eps = r / C
    else:
        alpha = a * (1.0 - lam) * 2.0 ** -8 / (1.0 + n ** metric.s)
        eps = r
    center = isometry_patch(f, inside, a, eps, theta)
    offset = eps * a / 64.0
    partners = np.array([model.point_at_distance(z, offset, theta).point for z in inside])
    radius = alpha * r
    params = {"alpha": alpha, "eps": eps, "a": a, "n": n, "partner_distance": offset,
              "net_points": int(len(inside)), "center_analytic": 0.75 * r}
    return _finish("local_lipschitz", f, r, center, radius, math.log2(radius),
                   LocalLipAbove(lam, inside, partners), metric, params, theta, float(n) + 1.0)


def build_witness(kind, **kwargs):
    """Dispatch to the builder of *kind*.

    Raises:
        E.WitnessError: unknown kind (``4003``).
    """
    builders = {
        "ball_invariance": ball_invariance_witness,
        "rakotch": rakotch_witness,
        "modcont": modcont_witness,
        "shrink": shrink_witness,
        "local_lipschitz": local_lipschitz_witness,
    }
    if kind not in builders:
        raise E.WitnessError(f"Unknown witness kind: {kind!r}", code="4003")
    return builders[kind](**kwargs)


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def certified_distance(w, f, g, analytic, seed, budget=None):
    """Certified ``d(f, g)`` in the witness metric, and the raw estimate.

    Sup-based metrics give ``max(analytic, (1 + member_safety_margin) estimate)``
    (the series tail is added to the estimate); the pointwise metric gives
    ``value + tail``.
    """
    metric = w.metric
    if metric.kind == "pointwise":
        mv = pointwise_metric(f, g, metric.dense_seq, metric.N)
        return mv.upper, mv
    if metric.kind == "series":
        mv = series_metric(f, g, metric.theta, metric.gauge, metric.N, budget or metric.budget,
                           seed)
        estimate = mv.value + mv.tail_bound
    else:
        mv = weighted_sup_metric(f, g, metric.theta, metric.s, budget or metric.budget, seed,
                                 extra_points=w.predicate.points())
        estimate = mv.value
    certified = (1.0 + _setting("member_safety_margin")) * estimate
    if analytic is not None:
        certified = max(certified, analytic)
    return certified, mv


def certify_center(w, seed=0):
    """The check ``d(base_f, center_g) < r``."""
    if w.metric.kind == "pointwise":
        certified, mv = certified_distance(w, w.base_f, w.center_g, None, seed)
    else:
        certified, mv = certified_distance(w, w.base_f, w.center_g,
                                           w.params.get("center_analytic"), seed)
    return Check("center_in_base_ball", "verify_witness",
                 "the witness center lies inside the base ball", w.r, certified, "<",
                 _setting("strictness_slack"),
                 {"estimate": mv.value, "tail": mv.tail_bound,
                  "analytic": w.params.get("center_analytic")})


@dataclass
class MemberResult:
    """Outcome for one member of the witness ball."""
    index: int
    kind: str
    parameter: float
    in_ball: Check
    predicate: Check
    error: str = None

    @property
    def passed(self):
        return self.error is None and self.in_ball.passed and self.predicate.passed


@dataclass
class WitnessReport:
    """Report of :func:`verify_witness`."""
    witness: PorosityWitness
    center_check: Check
    members: list

    @property
    def passed_count(self):
        return sum(1 for m in self.members if m.passed)

    @property
    def failed_count(self):
        return len(self.members) - self.passed_count

    @property
    def worst_margin(self):
        margins = [m.predicate.margin for m in self.members if m.error is None]
        return min(margins) if margins else math.nan

    @property
    def checks(self):
        rows = [self.center_check]
        for m in self.members:
            rows.append(m.in_ball)
            rows.append(m.predicate)
        return rows

    @property
    def passed(self):
        return all_passed(self.checks)


def _failed_member(w, index, kind, exc):
    details = {"member": index, "error": str(exc)}
    nan = math.nan
    return MemberResult(
        index, kind, nan,
        Check("member_in_ball", "verify_witness", "generated member lies in the witness ball",
              w.radius, nan, "<=", 0.0, details),
        Check(w.predicate.name, "verify_witness", w.predicate.anchor, nan, nan, "<=", 0.0,
              details),
        str(exc))


def verify_witness(w, member_count, seed=0, budget=None):
    """Generate *member_count* members of the witness ball and evaluate the predicate on each.

    Member 0 is the center itself.  Members run in parallel with seeds
    derived from ``(seed, index)``; a member whose generation or evaluation
    fails is reported as a failed row.

    Raises:
        E.InputError: ``member_count < 1`` (``1309``).
    """
    if member_count < 1:
        raise E.InputError(f"Member count must be at least 1: {member_count!r}", code="1309")
    budget = _budget(budget)

    def run(index):
        s = sub_seed(seed, index)
        kind = "center"
        try:
            member = generate_member(w, index, s)
            kind = member.kind
            in_ball = Check("member_in_ball", "verify_witness",
                            "generated member lies in the witness ball", w.radius,
                            member.certified, "<=", 0.0,
                            {"member": index, "kind": member.kind, "parameter": member.parameter})
            check = w.predicate.evaluate(member.h, budget, s)
            check = Check(check.name, check.operation, check.anchor, check.bound, check.measured,
                          check.direction, check.slack, {**check.details, "member": index})
            return MemberResult(index, member.kind, member.parameter, in_ball, check)
        except E.LabError as exc:
            log.warning("member %d of %s witness failed: %s", index, w.kind, exc)
            return _failed_member(w, index, kind, exc)

    results = sorted(parallel_map(run, range(member_count)), key=lambda m: m.index)
    report = WitnessReport(w, certify_center(w, seed), results)
    log.debug("%s witness: %d/%d members pass, worst margin %.6g", w.kind, report.passed_count,
              member_count, report.worst_margin)
    return report
