"""
Metrics on the space of nonexpansive mappings.

Three families are implemented:

- ``series``    ``d_{theta,phi}(f,g) = sum_n phi_inv(1/n) d_n / (1 + d_n)`` with
                ``d_n = sup { rho(f(x), g(x)) : x in B(theta, n) }``
- ``weighted``  ``d_{theta,s}(f,g) = sup_x rho(f(x), g(x)) / (1 + rho(x, theta)^s)``
- ``pointwise`` ``d_z(f,g) = sum_n 2^-n r_n / (1 + r_n)``, ``r_n = rho(f(z_n), g(z_n))``

Suprema are sampled, so sup-based values are lower estimates; every
:class:`MetricValue` carries a ``tail_bound`` certifying what the
truncation (series, pointwise) or the unsampled far region (weighted)
can add.  Checks in this module compare lower estimates against
certified upper values, so sampling error can only weaken them.

Usage::

    from nonexp_lab.metrics import MapMetric, make_log_gauge

    metric = MapMetric.series(theta=[0.0], gauge=make_log_gauge())
    metric.distance(constant(R1, [0.0]), constant(R1, [1.0])).value   # ~0.5
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..geometry.sampling import ball_sampler
from ..geometry.spaces import EuclideanSpace
from ..mappings.estimators import empirical_lipschitz
from ..mappings.nonexp_map import constant, cone_map
from ..utility import config_manager
from ..utility import error as E
from ..utility.checks import Check
from ..utility.utility import get_logger, parallel_map, rng_for, sub_seed
from .dense import DenseSequence

log = get_logger(__name__)

# weighted metric samples shells of radius 2^0 .. 2^WEIGHTED_MAX_SHELL
WEIGHTED_MAX_SHELL = 16
# series metric: per-n sample counts for n <= SERIES_DENSE_N, a fixed small count beyond
SERIES_DENSE_N = 64
SERIES_SPARSE_COUNT = 4
# n-terms per parallel task
SERIES_CHUNK = 256


@dataclass(frozen=True)
class MetricValue:
    """A metric evaluation.

    ``value`` is a lower estimate for sup-based parts (exact for the
    pointwise metric); ``value + tail_bound`` is the certified upper value
    whenever the sampled suprema are attained.
    """
    value: float
    tail_bound: float = 0.0
    budget_used: int = 0
    details: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def upper(self):
        return self.value + self.tail_bound


def _check_pair(f, g):
    if f.model != g.model:
        raise E.InputError("Map belongs to a different model.", code="1100")
    return f.model


def _budget(budget):
    if budget is None:
        budget = int(config_manager.load_setting_value("default_budget"))
    if budget < 1:
        raise E.InputError("Sample count must be at least 1.", code="1004")
    return int(budget)


def _displacement(f, g, pts):
    return f.model.dist_pairs(f.evaluate_many(pts), g.evaluate_many(pts))


def _refine_point(model, score, x, value, scale, seed, admissible=None):
    """Gaussian refinement of a single maximizing point."""
    rounds = int(config_manager.load_setting_value("refinement_rounds"))
    rng = rng_for(seed, 13)
    for k in range(rounds):
        sigma = scale * math.ldexp(1.0, -k)
        cand = np.array([model.perturb(x, sigma, rng) for _ in range(16)])
        if admissible is not None:
            cand = cand[admissible(cand)]
            if cand.shape[0] == 0:
                continue
        s = score(cand)
        i = int(np.argmax(s))
        if s[i] > value:
            value, x = float(s[i]), cand[i]
    return value, x


# ---------------------------------------------------------------------------
# d_{n,theta}
# ---------------------------------------------------------------------------

def d_n_theta(f, g, n, theta, budget=None, seed=0):
    """Sampled ``sup { rho(f(x), g(x)) : x in B(theta, n) }``, extreme points included."""
    model = _check_pair(f, g)
    if not n >= 1:
        raise E.InputError(f"Estimator parameter must be positive: n={n!r}", code="1102")
    budget = _budget(budget)
    theta = model.validate(theta)
    pts = ball_sampler(model, theta, float(n), budget, seed, include_extremes=True)
    disp = _displacement(f, g, pts)
    i = int(np.argmax(disp))

    def inside(cand):
        return model.dist_many(theta, cand) <= n

    value, x = _refine_point(model, lambda c: _displacement(f, g, c), pts[i], float(disp[i]),
                             n / 16.0, seed, inside)
    return MetricValue(value, 0.0, pts.shape[0], {"argmax": x})


# ---------------------------------------------------------------------------
# Series metric
# ---------------------------------------------------------------------------

def _shell_sup(f, g, theta, n, per_n, seed):
    model = f.model
    pts = ball_sampler(model, theta, float(n), per_n, sub_seed(seed, n), include_extremes=True)
    if n == 1:
        pts = np.concatenate([theta[None, :], pts])
    return float(np.max(_displacement(f, g, pts))), pts.shape[0]


def series_d_n(f, g, theta, N, budget, seed):
    """``d_1 <= ... <= d_N`` from one radial sample; batches depend on ``(seed, n)`` only."""
    dense = max(SERIES_SPARSE_COUNT, budget // SERIES_DENSE_N)
    counts = [dense if n <= SERIES_DENSE_N else SERIES_SPARSE_COUNT for n in range(1, N + 1)]
    chunks = [range(lo, min(N, lo + SERIES_CHUNK - 1) + 1) for lo in range(1, N + 1, SERIES_CHUNK)]

    def run(chunk):
        return [_shell_sup(f, g, theta, n, counts[n - 1], seed) for n in chunk]

    sups, used = [], 0
    for part in parallel_map(run, chunks):
        for s, k in part:
            sups.append(s)
            used += k
    return np.maximum.accumulate(np.array(sups)), used


def series_metric(f, g, theta, gauge, N=None, budget=None, seed=0):
    """Truncated series metric ``d_{theta,phi}`` with the certified tail ``sum_{n>N} phi_inv(1/n)``.

    Raises:
        E.GaugeError: the gauge fails (C4) or has no certified tail (code ``3000``).
        E.InputError: ``N < 1`` (code ``1200``).
    """
    model = _check_pair(f, g)
    if not gauge.summable:
        raise E.GaugeError("Gauge fails (C4) and has no summable majorant; refusing series "
                           f"metric ({gauge.label}).", code="3000")
    N = gauge.default_N if N is None else int(N)
    if N < 1:
        raise E.InputError("Truncation N must be at least 1.", code="1200")
    budget = _budget(budget)
    theta = model.validate(theta)
    d_n, used = series_d_n(f, g, theta, N, budget, seed)
    w = gauge.weights(N)
    value = float(np.sum(w * d_n / (1.0 + d_n)))
    return MetricValue(value, gauge.tail(N), used, {"d_n": d_n, "N": N})


# ---------------------------------------------------------------------------
# Weighted sup metric
# ---------------------------------------------------------------------------

def weighted_tail_bound(s, c, r_max):
    """``sup_{R >= r_max} (2R + c) / (1 + R^s)``.

    For nonexpansive maps ``rho(f(x), g(x)) <= 2 rho(x, theta) + c`` with
    ``c = rho(f(theta), g(theta))``, so this bounds the weighted quotient
    beyond the sampled shells.
    """
    if s == 1.0:
        return max(2.0, (2.0 * r_max + c) / (1.0 + r_max))

    def q(R):
        return (2.0 * R + c) / (1.0 + R ** s)

    # the derivative of q has the sign of h, which decreases in R
    def h(u):
        R = math.exp(u)
        return 2.0 - (2.0 * s - 2.0) * R ** s - s * c * R ** (s - 1.0)

    lo = math.log(r_max)
    if h(lo) <= 0.0:
        return q(r_max)
    hi = lo + 1.0
    while h(hi) > 0.0:
        hi = lo + 2.0 * (hi - lo)
    return q(math.exp(brentq(h, lo, hi)))


def weighted_sup_metric(f, g, theta, s, budget=None, seed=0, extra_points=()):
    """Sampled ``d_{theta,s}`` over shells ``2^0 .. 2^16`` plus the center and *extra_points*.

    Raises:
        E.InputError: ``s < 1`` (code ``1201``).
    """
    model = _check_pair(f, g)
    if not s >= 1:
        raise E.InputError(f"Weight exponent s must be at least 1: {s!r}", code="1201")
    budget = _budget(budget)
    theta = model.validate(theta)
    per_shell = max(8, budget // (WEIGHTED_MAX_SHELL + 1))

    def shell(k):
        return ball_sampler(model, theta, math.ldexp(1.0, k), per_shell, sub_seed(seed, k),
                            include_extremes=True)

    parts = [theta[None, :]] + parallel_map(shell, range(WEIGHTED_MAX_SHELL + 1))
    extra = [model.validate(p) for p in extra_points]
    if extra:
        parts.append(np.array(extra))
    pts = np.concatenate(parts)

    def score(cand):
        return _displacement(f, g, cand) / (1.0 + model.dist_many(theta, cand) ** s)

    ratios = score(pts)
    i = int(np.argmax(ratios))
    scale = max(1.0, model.dist(theta, pts[i])) / 16.0
    value, x = _refine_point(model, score, pts[i], float(ratios[i]), scale, seed)
    c = model.dist(f(theta), g(theta))
    tail = weighted_tail_bound(float(s), c, math.ldexp(1.0, WEIGHTED_MAX_SHELL))
    return MetricValue(value, tail, pts.shape[0], {"argmax": x, "s": s})


# ---------------------------------------------------------------------------
# Pointwise metric
# ---------------------------------------------------------------------------

def pointwise_metric(f, g, dense_seq, N=None):
    """``d_z(f, g)`` truncated after *N* terms; ``tail_bound = 2^-N``."""
    model = _check_pair(f, g)
    if dense_seq.model != model:
        raise E.InputError("Map belongs to a different model.", code="1100")
    N = int(config_manager.load_setting_value("series_truncation_log")) if N is None else int(N)
    if N < 1:
        raise E.InputError("Truncation N must be at least 1.", code="1200")
    z = dense_seq.prefix(N)
    r = _displacement(f, g, z)
    w = np.exp2(-np.arange(1, N + 1, dtype=float))
    return MetricValue(float(np.sum(w * r / (1.0 + r))), math.ldexp(1.0, -N), N,
                       {"r_n": r, "version": dense_seq.version})


# ---------------------------------------------------------------------------
# MapMetric
# ---------------------------------------------------------------------------

class MapMetric:
    """A configured metric on mapping space.

    Build with :meth:`series`, :meth:`weighted` or :meth:`pointwise`;
    evaluate with :meth:`distance`.
    """

    KINDS = ("series", "weighted", "pointwise")

    def __init__(self, kind, *, theta=None, gauge=None, N=None, s=None, dense_seq=None,
                 budget=None):
        if kind not in self.KINDS:
            raise E.GaugeError(f"Unknown metric kind: {kind!r}", code="3004")
        self.kind = kind
        self.theta = None if theta is None else np.asarray(theta, dtype=float)
        self.gauge = gauge
        self.N = N
        self.s = s
        self.dense_seq = dense_seq
        self.budget = budget

    @classmethod
    def series(cls, theta, gauge, N=None, budget=None):
        if not gauge.summable:
            raise E.GaugeError("Gauge fails (C4) and has no summable majorant; refusing series "
                               f"metric ({gauge.label}).", code="3000")
        return cls("series", theta=theta, gauge=gauge, N=gauge.default_N if N is None else N,
                   budget=budget)

    @classmethod
    def weighted(cls, theta, s, budget=None):
        if not s >= 1:
            raise E.InputError(f"Weight exponent s must be at least 1: {s!r}", code="1201")
        return cls("weighted", theta=theta, s=float(s), budget=budget)

    @classmethod
    def pointwise(cls, dense_seq, N=None):
        if N is None:
            N = int(config_manager.load_setting_value("series_truncation_log"))
        return cls("pointwise", dense_seq=dense_seq, N=N)

    def distance(self, f, g, seed=0, extra_points=()):
        if self.kind == "series":
            return series_metric(f, g, self.theta, self.gauge, self.N, self.budget, seed)
        if self.kind == "weighted":
            return weighted_sup_metric(f, g, self.theta, self.s, self.budget, seed, extra_points)
        return pointwise_metric(f, g, self.dense_seq, self.N)

    def describe(self):
        out = {"kind": self.kind}
        if self.theta is not None:
            out["theta"] = self.theta.tolist()
        if self.gauge is not None:
            out["gauge"] = self.gauge.label
        for key in ("N", "s"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out

    def __repr__(self):
        return f"MapMetric({self.describe()})"


# ---------------------------------------------------------------------------
# Local versus global distance
# ---------------------------------------------------------------------------

def local_from_global(d_val, m, gauge):
    """Pointwise bound on ``B(theta, m)`` implied by ``d_{theta,phi}(f, g) = d_val``.

    Returns ``2 d_val / phi_inv(1/m)`` when ``d_val <= phi_inv(1/m) / 2``,
    otherwise ``None`` (no bound).
    """
    if m < 1:
        raise E.InputError("Index m must be at least 1.", code="1204")
    if d_val < 0:
        raise E.InputError(f"Estimator parameter must be positive: d_val={d_val!r}", code="1102")
    w = gauge.phi_inv(1.0 / m)
    if d_val > 0.5 * w:
        return None
    return 2.0 * d_val / w


def local_within(d_val, m, gauge, r):
    """``d_val <= (r/2) phi_inv(1/m)`` for ``r`` in (0, 1]: then ``rho(f(z), g(z)) <= r`` on ``B(theta, m)``."""
    if not 0 < r <= 1:
        raise E.WitnessError(f"Radius r outside admissible range: {r!r}", code="4000")
    return d_val <= 0.5 * r * gauge.phi_inv(1.0 / m)


def local_within_doubled(d_val, m, gauge, r):
    """The ``2m`` form: for ``m >= 1/phi(eta)``, ``d_val <= r phi_inv(1/(2m))`` gives ``rho <= r``.

    Returns ``None`` when *m* is too small for this form.
    """
    if not 0 < r <= 1:
        raise E.WitnessError(f"Radius r outside admissible range: {r!r}", code="4000")
    if m < 1.0 / gauge.phi(gauge.eta):
        return None
    return d_val <= r * gauge.phi_inv(1.0 / (2.0 * m))


def local_from_global_weighted(d_val, x_dist, s):
    """``rho(f(x), g(x)) <= (1 + rho(x, theta)^s) d_{theta,s}(f, g)``."""
    return (1.0 + x_dist ** s) * d_val


# ---------------------------------------------------------------------------
# Equivalence checks
# ---------------------------------------------------------------------------

def basepoint_equivalence_check(metric_kind, theta1, theta2, map_pairs, budget=None, seed=0,
                                gauge=None, s=2.0, N=None):
    """Check the basepoint equivalence inequalities on each pair of maps.

    ``weighted``: ``d_{theta1,s} >= d_{theta2,s} / (2^s (1 + rho(theta1, theta2)^s))`` and
    symmetrically.  ``series``: ``d_{theta2,phi} <= C_k d_{theta1,phi}`` and symmetrically,
    with ``k = ceil(rho(theta1, theta2))``.  Lower estimates are compared
    against certified upper values.

    Returns:
        list[Check]
    """
    pairs = list(map_pairs)
    if not pairs:
        raise E.InputError("Empty list of map pairs.", code="1202")
    model = _check_pair(*pairs[0])
    theta1, theta2 = model.validate(theta1), model.validate(theta2)
    rho = model.dist(theta1, theta2)
    same = rho == 0.0
    checks = []
    for i, (f, g) in enumerate(pairs):
        if metric_kind == "weighted":
            d1 = weighted_sup_metric(f, g, theta1, s, budget, seed)
            d2 = weighted_sup_metric(f, g, theta2, s, budget, seed)
            K = 2.0 ** s * (1.0 + rho ** s)
            anchor = "weighted metrics with different basepoints are equivalent"
            checks.append(Check(f"pair{i}:theta1_vs_theta2", "basepoint_equivalence_check", anchor,
                                d2.value / K, d1.upper, ">=", f.model.tol, {"factor": K}))
            checks.append(Check(f"pair{i}:theta2_vs_theta1", "basepoint_equivalence_check", anchor,
                                d1.value / K, d2.upper, ">=", f.model.tol, {"factor": K}))
        elif metric_kind == "series":
            if gauge is None:
                raise E.GaugeError("Unknown gauge kind: None", code="3002")
            k = int(math.ceil(rho))
            C_k = 1.0 if k == 0 else gauge.C_k(k)
            d1 = series_metric(f, g, theta1, gauge, N, budget, seed)
            d2 = series_metric(f, g, theta2, gauge, N, budget, seed)
            anchor = "series metrics with different basepoints are equivalent via C_k"
            checks.append(Check(f"pair{i}:theta2_by_theta1", "basepoint_equivalence_check", anchor,
                                C_k * d1.upper, d2.value, "<=", f.model.tol, {"k": k, "C_k": C_k}))
            checks.append(Check(f"pair{i}:theta1_by_theta2", "basepoint_equivalence_check", anchor,
                                C_k * d2.upper, d1.value, "<=", f.model.tol, {"k": k, "C_k": C_k}))
        else:
            raise E.GaugeError(f"Unknown metric kind: {metric_kind!r}", code="3004")
        if same:
            checks.append(Check(f"pair{i}:equal_basepoints", "basepoint_equivalence_check",
                                "equal basepoints give equal distances", d1.value, d2.value, "==",
                                f.model.tol))
    return checks


def bounded_equivalence_check(f, g, theta, gauge, diam, budget=None, seed=0):
    """Check the series metric against ``d_inf`` for maps restricted to ``B(theta, diam/2)``.

    With ``C = diam`` and ``N = ceil(C)``:
    ``(1/(1+C)) (sum_{n>=N} phi_inv(1/n)) d_inf <= d_{theta,phi} <= d_inf sum_n phi_inv(1/n)``.
    ``d_n`` is the sup over ``B(theta, min(n, diam/2))``, all from one sample.

    Returns:
        list[Check]
    """
    model = _check_pair(f, g)
    if not diam > 0:
        raise E.InputError(f"Radius must be positive: {diam!r}", code="1003")
    budget = _budget(budget)
    theta = model.validate(theta)
    R = diam / 2.0
    pts = ball_sampler(model, theta, R, budget, seed, include_extremes=True)
    disp = _displacement(f, g, pts)
    radii = model.dist_many(theta, pts)
    d_inf = float(np.max(disp))
    N_trunc = max(gauge.default_N, int(math.ceil(diam)))
    ns = np.arange(1, N_trunc + 1, dtype=float)
    order = np.argsort(radii)
    prefix = np.maximum.accumulate(disp[order])
    idx = np.searchsorted(radii[order], np.minimum(ns, R) + model.tol, side="right") - 1
    d_n = np.where(idx >= 0, prefix[np.clip(idx, 0, None)], 0.0)
    value = float(np.sum(gauge.weights(N_trunc) * d_n / (1.0 + d_n)))
    tail = gauge.tail(N_trunc)
    N = int(math.ceil(diam))
    anchor = "series metric and uniform metric are equivalent on bounded spaces"
    lower = d_inf / (1.0 + diam) * gauge.sum_from(N, N_trunc)
    upper = d_inf * gauge.sum_from(1, N_trunc)
    return [
        Check("displacement_within_diameter", "bounded_equivalence_check", anchor,
              diam, d_inf, "<=", model.tol),
        Check("lower_chain", "bounded_equivalence_check", anchor, value + tail, lower, "<=",
              model.tol, {"d_inf": d_inf, "N": N}),
        Check("upper_chain", "bounded_equivalence_check", anchor, upper, value, "<=", model.tol,
              {"d_inf": d_inf}),
    ]


# ---------------------------------------------------------------------------
# d_{theta,1} does not give uniform convergence on bounded sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DivergenceRow:
    n: int
    ratio: float
    expected: float
    inner_sup: float
    peak_distance: float
    lip: float


@dataclass
class DivergenceReport:
    rows: list
    checks: list
    maps: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def divergence_map(model, theta, n):
    """``f_n(x) = (1 - l(x)) theta (+) l(x) x_n``, ``l(x) = max(1 - rho(x, x_n)/n, 0) / 2``, ``rho(theta, x_n) = 2n``.

    Returns ``(f_n, x_n)``.
    """
    x_n = model.point_at_distance(theta, 2.0 * n).point
    mid = model.combine(theta, x_n, 0.5)
    return cone_map(model, x_n, float(n), theta, mid), x_n


def d_theta1_divergence_demo(n_max, model=None, theta=None, budget=None, seed=0, n_min=3):
    """Maps ``f_n`` equal to ``theta`` on ``B(theta, n)`` with ``d_{theta,1}(f_n, theta) >= n/(1+2n)``.

    For each ``n_min <= n <= n_max`` checks that ``f_n`` is constant on the
    ball, that the weighted quotient at ``x_n`` is ``n/(1+2n) >= 1/3`` and
    that ``f_n`` is nonexpansive on samples.

    Raises:
        E.InputError: ``n_max < 3`` (code ``1203``).
    """
    if n_max < 3 or n_min < 1 or n_min > n_max:
        raise E.InputError("Divergence demo needs n_max >= 3.", code="1203")
    model = EuclideanSpace(1) if model is None else model
    theta = model.origin() if theta is None else model.validate(theta)
    budget = _budget(budget)
    g = constant(model, theta)
    slack = max(1e-9, model.tol)
    lip_slack = float(config_manager.load_setting_value("lipschitz_slack"))
    rows, checks, maps = [], [], {}
    for n in range(n_min, n_max + 1):
        f_n, x_n = divergence_map(model, theta, n)
        maps[n] = f_n
        inner = d_n_theta(f_n, g, n, theta, budget, sub_seed(seed, n, 1)).value
        ratio = weighted_sup_metric(f_n, g, theta, 1.0, budget, sub_seed(seed, n, 2),
                                    extra_points=[x_n]).value
        peak = model.dist(f_n(x_n), theta)
        lip = empirical_lipschitz(f_n, theta, 4.0 * n, budget, sub_seed(seed, n, 3)).value
        expected = n / (1.0 + 2.0 * n)
        rows.append(DivergenceRow(n, ratio, expected, inner, peak, lip))
        op = "d_theta1_divergence_demo"
        checks += [
            Check(f"n{n}:constant_on_ball", op, "f_n equals theta on B(theta, n)", 0.0, inner,
                  "<=", model.tol),
            Check(f"n{n}:ratio_at_least_third", op, "d_theta1(f_n, theta) >= n/(1+2n) >= 1/3",
                  1.0 / 3.0, ratio, ">=", slack),
            Check(f"n{n}:ratio_value", op, "d_theta1(f_n, theta) = n/(1+2n)", expected, ratio,
                  "==", slack),
            Check(f"n{n}:nonexpansive", op, "f_n is nonexpansive", 1.0 + lip_slack, lip, "<="),
        ]
    log.debug("divergence demo: %d rows", len(rows))
    return DivergenceReport(rows, checks, maps)
