"""
Builders for the key-value specs of experiment configs.

Configs describe objects, never code.  Every spec is a JSON object (or, for
models and gauges, a bare kind name):

=============  ===============================================================
section        spec
=============  ===============================================================
model          ``"euclidean"`` or ``{"kind": "hyperboloid2", "dim": 2}``
gauge          ``"log"``, ``"power"``, ``{"kind": "porosity_power", "s": 3}``,
               ``{"kind": "table", "ts": [...], "phis": [...], "eta": 0.5}``
metric         ``{"kind": "series", "theta": [0], "N": 60}``,
               ``{"kind": "weighted", "theta": [0], "s": 2}``,
               ``{"kind": "pointwise", "N": 60, "origin": [0]}``
maps           ``{"f": <map>, "g": <map>}``
=============  ===============================================================

Map specs are constructor trees keyed by ``op``::

    {"op": "contract_toward", "gamma": 0.25, "theta": [0],
     "f": {"op": "affine", "matrix": 1.0, "offset": [1.0]}}

Supported ops: ``identity``, ``constant`` (``p``), ``affine`` (``matrix``,
``offset``), ``contract_toward`` (``f``, ``theta``, ``gamma``),
``convex_with_constant`` (``f``, ``p``, ``beta``), ``compose`` (``outer``,
``inner``), ``radial_collapse`` (``z``, ``R``, ``eps``) and
``witness_center`` (``f``, ``witness``: the center of a witness over ``f``).

Witness specs carry ``kind`` and the parameters of the builder of that kind;
``theta`` defaults to the model origin and ``net`` is either
``{"points": [...]}`` or ``{"cloud": {...}, "a": ...}``.
"""

import numpy as np

from ..geometry.sampling import ball_sampler
from ..geometry.spaces import make_model
from ..mappings import nonexp_map as M
from ..metrics.dense import DenseSequence
from ..metrics.gauges import make_log_gauge, make_porosity_power, make_power_gauge, make_table_gauge
from ..metrics.map_metrics import MapMetric
from ..perturbations.constructors import greedy_separated_net, radial_collapse
from ..perturbations.witnesses import WITNESS_KINDS, build_witness
from ..utility import error as E
from ..utility.utility import get_logger

log = get_logger(__name__)

MAP_OPS = ("identity", "constant", "affine", "contract_toward", "convex_with_constant", "compose",
           "radial_collapse", "witness_center")


def spec_kind(spec, section):
    if isinstance(spec, str):
        return spec, {}
    if isinstance(spec, dict) and isinstance(spec.get("kind"), str):
        return spec["kind"], spec
    raise E.ConfigError(f"Invalid config value: {section} spec needs a 'kind', got {spec!r}.",
                        code="5103")


def get_value(spec, key, section, default=...):
    if not isinstance(spec, dict):
        raise E.ConfigError(f"Invalid config value: {section} must be an object, got {spec!r}.",
                            code="5103", context={"section": section})
    if key in spec:
        return spec[key]
    if default is not ...:
        return default
    raise E.ConfigError(f"Invalid config value: {section} spec is missing '{key}'.", code="5103",
                        context={"section": section, "key": key})


def get_number(spec, key, section, default=...):
    value = get_value(spec, key, section, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise E.ConfigError(f"Invalid config value: '{key}' in {section} must be a number, "
                            f"got {value!r}.", code="5103")
    return value


def get_point(model, value, section):
    try:
        return model.validate(np.asarray(value, dtype=float))
    except (TypeError, ValueError):
        raise E.ConfigError(f"Invalid config value: point {value!r} in {section}.", code="5103")


def get_array(value, key, section):
    """Float array from a raw config value (no validation against a model)."""
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        arr = None
    if arr is None or not np.all(np.isfinite(arr)):
        raise E.ConfigError(f"Invalid config value: '{key}' in {section} must be numeric, "
                            f"got {value!r}.", code="5103", context={"section": section, "key": key})
    return arr


# ---------------------------------------------------------------------------
# Models, gauges, metrics
# ---------------------------------------------------------------------------

def build_model(spec):
    kind, spec = spec_kind(spec, "model")
    return make_model(kind, spec.get("dim"))


def build_gauge(spec):
    kind, spec = spec_kind(spec, "gauge")
    if kind == "log":
        return make_log_gauge()
    if kind == "power":
        return make_power_gauge()
    if kind == "porosity_power":
        return make_porosity_power(get_number(spec, "s", "gauge"))
    if kind == "table":
        return make_table_gauge(get_array(get_value(spec, "ts", "gauge"), "ts", "gauge"),
                                get_array(get_value(spec, "phis", "gauge"), "phis", "gauge"),
                                eta=get_number(spec, "eta", "gauge", None))
    raise E.GaugeError(f"Unknown gauge kind: {kind!r}", code="3002")


def build_metric(spec, model, gauge=None, budget=None):
    """A :class:`MapMetric`; series metrics use *gauge* unless the spec names its own."""
    kind, spec = spec_kind(spec, "metric")
    if kind == "series":
        if "gauge" in spec:
            gauge = build_gauge(spec["gauge"])
        if gauge is None:
            raise E.ConfigError("Missing config section 'gauge' for a series metric.",
                                code="5102", context={"section": "gauge"})
        theta = get_point(model, spec.get("theta", model.origin()), "metric")
        return MapMetric.series(theta, gauge, get_number(spec, "N", "metric", None), budget)
    if kind == "weighted":
        theta = get_point(model, spec.get("theta", model.origin()), "metric")
        return MapMetric.weighted(theta, get_number(spec, "s", "metric", 2.0), budget)
    if kind == "pointwise":
        origin = get_point(model, spec.get("origin", model.origin()), "metric")
        return MapMetric.pointwise(DenseSequence(model, origin), get_number(spec, "N", "metric", None))
    raise E.GaugeError(f"Unknown metric kind: {kind!r}", code="3004")


# ---------------------------------------------------------------------------
# Maps
# ---------------------------------------------------------------------------

class BuildContext:
    """What map specs may refer to: the model, the metric and the witnesses built so far."""

    def __init__(self, model, metric=None, budget=None):
        self.model = model
        self.metric = metric
        self.budget = budget
        self.witnesses = []


def build_map(spec, ctx):
    """A :class:`NonexpMap` from a constructor-tree spec.

    Raises:
        E.ConfigError: unknown op (``5104``) or malformed spec (``5103``).
    """
    if not isinstance(spec, dict) or "op" not in spec:
        raise E.ConfigError(f"Invalid config value: map spec needs an 'op', got {spec!r}.",
                            code="5103")
    op = spec["op"]
    model = ctx.model
    if op == "identity":
        return M.identity(model)
    if op == "constant":
        return M.constant(model, get_point(model, get_value(spec, "p", "map"), "map"))
    if op == "affine":
        matrix = get_value(spec, "matrix", "map")
        offset = get_value(spec, "offset", "map", [0.0] * model.coord_dim)
        return M.affine(model, get_array(matrix, "matrix", "map"), get_array(offset, "offset", "map"))
    if op == "contract_toward":
        theta = get_point(model, spec.get("theta", model.origin()), "map")
        return M.contract_toward(build_map(get_value(spec, "f", "map"), ctx), theta,
                                 get_number(spec, "gamma", "map"))
    if op == "convex_with_constant":
        return M.convex_with_constant(build_map(get_value(spec, "f", "map"), ctx),
                                      get_point(model, get_value(spec, "p", "map"), "map"),
                                      get_number(spec, "beta", "map"))
    if op == "compose":
        return M.compose(build_map(get_value(spec, "outer", "map"), ctx),
                         build_map(get_value(spec, "inner", "map"), ctx))
    if op == "radial_collapse":
        return radial_collapse(model, get_point(model, get_value(spec, "z", "map"), "map"),
                               get_number(spec, "R", "map"), get_number(spec, "eps", "map"))
    if op == "witness_center":
        witness = build_witness_spec(get_value(spec, "witness", "map"), build_map(get_value(spec, "f", "map"),
                                                                             ctx), ctx)
        ctx.witnesses.append(witness)
        return witness.center_g
    raise E.ConfigError(f"Unknown map constructor: {op!r}", code="5104", context={"op": op})


def build_maps(spec, ctx):
    if not isinstance(spec, dict) or "f" not in spec:
        raise E.ConfigError("Invalid config value: 'maps' needs at least 'f'.", code="5103")
    return {name: build_map(sub, ctx) for name, sub in spec.items()}


# ---------------------------------------------------------------------------
# Nets and witnesses
# ---------------------------------------------------------------------------

def build_cloud(spec, model, seed):
    """Point cloud: ``{"points": [...]}`` or ``{"center", "radius", "count"}`` sampled from a ball."""
    if not isinstance(spec, dict):
        raise E.ConfigError(f"Invalid config value: cloud spec must be an object, got {spec!r}.",
                            code="5103", context={"section": "cloud"})
    if "points" in spec:
        pts = get_array(spec["points"], "points", "cloud")
        if pts.size % model.coord_dim:
            raise E.ConfigError(f"Invalid config value: 'points' in cloud do not have "
                                f"{model.coord_dim} coordinates each.", code="5103",
                                context={"section": "cloud", "key": "points"})
        return pts.reshape(-1, model.coord_dim)
    center = get_point(model, spec.get("center", model.origin()), "cloud")
    return ball_sampler(model, center, get_number(spec, "radius", "cloud"),
                        int(get_number(spec, "count", "cloud")), seed, include_extremes=True)


def build_net(spec, model, a, seed):
    """Greedy a-separated net over ``spec["cloud"]``, or over the spec itself when it lists points."""
    cloud = spec.get("cloud", spec) if isinstance(spec, dict) else spec
    return greedy_separated_net(model, build_cloud(cloud, model, seed), a)


def build_witness_spec(spec, f, ctx, seed=0):
    """A :class:`PorosityWitness` over *f* from a witness spec.

    Raises:
        E.WitnessError: unknown kind (``4003``).
    """
    kind, spec = spec_kind(spec, "witness")
    if kind not in WITNESS_KINDS:
        raise E.WitnessError(f"Unknown witness kind: {kind!r}", code="4003")
    model = ctx.model
    if ctx.metric is None:
        raise E.ConfigError("Missing config section 'metric' for a witness.", code="5102",
                            context={"section": "metric"})
    if kind == "shrink":
        metric = ctx.metric
        if metric.kind != "pointwise":
            raise E.WitnessError(f"Metric kind not supported by this witness: {metric.kind!r}",
                                 code="4004")
        return build_witness(kind, f=f, x=get_point(model, get_value(spec, "x", "witness"), "witness"),
                             y=get_point(model, get_value(spec, "y", "witness"), "witness"),
                             dense_seq=metric.dense_seq, metric=metric,
                             r=get_number(spec, "r", "witness", 0.5),
                             gamma=get_number(spec, "gamma", "witness", 0.1))
    theta = get_point(model, spec.get("theta", model.origin()), "witness")
    args = {"f": f, "r": get_number(spec, "r", "witness"), "theta": theta, "metric": ctx.metric}
    if kind == "rakotch":
        args["n"] = int(get_number(spec, "n", "witness"))
    elif kind == "modcont":
        args["t0"] = get_number(spec, "t0", "witness")
        args["mu"] = get_number(spec, "mu", "witness")
    elif kind == "local_lipschitz":
        a = get_number(spec, "a", "witness")
        args.update(n=get_number(spec, "n", "witness"), lam=get_number(spec, "lam", "witness"), a=a,
                    net=build_net(get_value(spec, "net", "witness"), model, a, seed))
    return build_witness(kind, **args)
