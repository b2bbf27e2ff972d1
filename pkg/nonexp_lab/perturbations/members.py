"""
Members of a witness ball ``B(center_g, radius)``.

Member 0 is the center.  Member ``i > 0`` is built from the center by one
of three perturbations, cycling with ``i``:

- ``contract``        ``contract_toward(g, theta, beta)``
- ``far_collapse``    ``g o radial_collapse(z, R, (1 - L)/L)`` with ``z`` beyond the
  region the predicate looks at (needs ``0 < L < 1``, otherwise ``contract``)
- ``convex_constant`` ``convex_with_constant(g, p, beta)`` with ``p`` at distance 1 from ``g(theta)``

The parameter starts at a random fraction of its initial value and is
halved until the certified distance to the center fits the radius.  For
sup-based metrics the certified distance is the larger of an analytic bound
and the sampled estimate times ``1 + member_safety_margin``; for the
pointwise metric it is the truncated sum plus its tail.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..mappings.nonexp_map import compose, contract_toward, convex_with_constant
from ..metrics.map_metrics import pointwise_metric, series_metric, weighted_sup_metric
from ..utility import config_manager
from ..utility.utility import get_logger, rng_for
from .constructors import radial_collapse

log = get_logger(__name__)

MEMBER_KINDS = ("contract", "far_collapse", "convex_constant")
# halvings before a member falls back to the center; 2^-1100 is below the float range
MAX_HALVINGS = 1100
# extra pointwise terms beyond -log2(radius)
POINTWISE_EXTRA_TERMS = 8


@dataclass
class Member:
    """A generated member ``h`` with its certified distance to the center."""
    index: int
    kind: str
    parameter: float
    h: object
    certified: float
    estimate: float = 0.0


def _analytic(w, kind, t, L, far):
    """Upper bound of ``d(g, h)`` for the sup-based metrics, or ``None`` for the pointwise one."""
    metric = w.metric
    if metric.kind == "pointwise":
        return None
    if metric.kind == "series":
        gauge = metric.gauge
        if kind == "contract":
            return t * L * gauge.C_phi
        if kind == "convex_constant":
            return t * (L * gauge.C_phi + gauge.sum_from(1))
        return L * t * gauge.sum_from(math.floor(far) + 1)
    if kind == "contract":
        return t * L
    if kind == "convex_constant":
        return t * (L + 1.0)
    return L * t / (1.0 + far ** metric.s)


def _estimate(w, g, h, seed):
    metric = w.metric
    budget = int(config_manager.load_setting_value("member_metric_budget"))
    if metric.kind == "series":
        return series_metric(g, h, metric.theta, metric.gauge, metric.N, budget, seed).value
    return weighted_sup_metric(g, h, metric.theta, metric.s, budget, seed,
                               extra_points=w.predicate.points()).value


def _pointwise_terms(w):
    return max(int(w.metric.N), math.ceil(-w.radius_log2) + POINTWISE_EXTRA_TERMS)


def generate_member(w, index, seed):
    """Member *index* of the ball of witness *w*.

    A degenerate witness (radius underflowed to zero) yields the center for
    every index.
    """
    g = w.center_g
    if index == 0:
        return Member(0, "center", 0.0, g, 0.0)
    if w.degenerate:
        return Member(index, "degenerate", 0.0, g, 0.0)

    model = g.model
    rng = rng_for(seed, index)
    theta = w.theta
    L = g.claimed_lip
    kind = MEMBER_KINDS[(index - 1) % len(MEMBER_KINDS)]
    if kind == "far_collapse" and not 0.0 < L < 1.0:
        kind = "contract"
    start = float(rng.uniform(0.5, 1.0))

    far = 0.0
    if kind == "far_collapse":
        eps = (1.0 - L) / L
        t = start
        outer = t * (1.0 + 1.0 / eps)
        D = w.action_radius + outer + 1.0
        z = model.point_at_distance(theta, D, model.perturb(theta, 1.0, rng)).point
        far = D - outer

        def build(t):
            return compose(g, radial_collapse(model, z, t, eps))
    elif kind == "convex_constant":
        t = 0.5 * start
        anchor = g(theta)
        p = model.point_at_distance(anchor, 1.0, model.perturb(anchor, 1.0, rng)).point

        def build(t):
            return convex_with_constant(g, p, t)
    else:
        t = 0.5 * start

        def build(t):
            return contract_toward(g, theta, t)

    margin = float(config_manager.load_setting_value("member_safety_margin"))
    for _ in range(MAX_HALVINGS):
        h = build(t)
        if w.metric.kind == "pointwise":
            mv = pointwise_metric(g, h, w.metric.dense_seq, _pointwise_terms(w))
            if mv.upper <= w.radius:
                return Member(index, kind, t, h, mv.upper, mv.value)
        else:
            analytic = _analytic(w, kind, t, L, far)
            if analytic <= w.radius:
                estimate = _estimate(w, g, h, seed)
                certified = max(analytic, (1.0 + margin) * estimate)
                if certified <= w.radius:
                    return Member(index, kind, t, h, certified, estimate)
        t *= 0.5
        if t == 0.0:
            break
    log.warning("member %d (%s) could not be fitted into radius %.6g; using the center",
                index, kind, w.radius)
    return Member(index, "center", 0.0, g, 0.0)
