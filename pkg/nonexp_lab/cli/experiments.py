"""
The five batch experiments behind the CLI subcommands.

Each ``cmd_*`` takes a loaded experiment config (see
:func:`~nonexp_lab.utility.config_manager.load_experiment`) and returns a
:class:`~nonexp_lab.cli.reports.Report`.  Building the objects a config
describes may raise any :class:`E.LabError`; a failed check never raises.
"""

import math
import os
from contextlib import contextmanager

from .. import __version__
from ..fixpoint.iteration import ball_invariance_check, iterate, rakotch_convergence_audit
from ..geometry.sampling import verify_hyperbolicity
from ..mappings.estimators import local_lipschitz, rakotch_gauges
from ..metrics.map_metrics import (
    basepoint_equivalence_check, bounded_equivalence_check, d_theta1_divergence_demo,
)
from ..perturbations.constructors import greedy_separated_net, isometry_patch
from ..perturbations.witnesses import certify_center, verify_witness
from ..utility import config_manager
from ..utility import error as E
from ..utility.checks import Check
from ..utility.utility import get_logger, sub_seed
from .reports import Report
from .specs import (
    BuildContext, build_cloud, build_gauge, build_maps, build_metric, build_model, build_witness_spec,
    get_number, get_point, get_value,
)

log = get_logger(__name__)

AXIOM_SAMPLES = 10_000
FIXPOINT_TOL = 1e-10
PATCH_ISOMETRY_SLACK = 1e-6


@contextmanager
def threads_from(config):
    """Route a config ``threads`` value through ``NONEXP_LAB_THREADS`` for the duration of a run."""
    threads = config.get("threads")
    if threads is None:
        yield
        return
    saved = os.environ.get(config_manager.THREADS_ENV)
    os.environ[config_manager.THREADS_ENV] = str(int(threads))
    try:
        yield
    finally:
        if saved is None:
            os.environ.pop(config_manager.THREADS_ENV, None)
        else:
            os.environ[config_manager.THREADS_ENV] = saved


def _report(command, config, checks, summary=None, trajectory=None):
    return Report(command, config, list(checks), summary or {}, __version__, trajectory)


def _context(config, with_metric=True):
    model = build_model(config["model"])
    gauge = build_gauge(config["gauge"]) if "gauge" in config else None
    metric = None
    if with_metric and "metric" in config:
        metric = build_metric(config["metric"], model, gauge, config.get("budget"))
    return BuildContext(model, metric, config.get("budget")), gauge


# ---------------------------------------------------------------------------
# verify-axioms
# ---------------------------------------------------------------------------

def cmd_verify_axioms(config):
    """One row per model: the largest axiom violation against the model tolerance."""
    section = config.get("axioms", {})
    samples = int(get_number(section, "samples", "axioms", AXIOM_SAMPLES))
    radius = get_number(section, "radius", "axioms", None)
    checks = []
    for i, spec in enumerate(config["models"]):
        model = build_model(spec)
        ax = verify_hyperbolicity(model, samples, sub_seed(config["seed"], i), config["tolerance"],
                                  radius)
        checks.append(Check(f"{model!r}:axioms", "verify_hyperbolicity",
                            "convex combinations satisfy the hyperbolic space axioms",
                            ax.tolerance, ax.max_violation, "<=", 0.0,
                            {"samples": ax.samples, **ax.violations}))
    return _report("verify-axioms", config, checks, {"models": len(checks)})


# ---------------------------------------------------------------------------
# metric
# ---------------------------------------------------------------------------

def _divergence_checks(config, model, seed):
    section = config["divergence"]
    theta = get_point(model, section.get("theta", model.origin()), "divergence")
    report = d_theta1_divergence_demo(int(get_number(section, "n_max", "divergence")), model, theta,
                                      config.get("budget"), seed,
                                      int(get_number(section, "n_min", "divergence", 3)))
    rows = [{"n": r.n, "ratio": r.ratio, "expected": r.expected} for r in report.rows]
    return report.checks, rows


def cmd_metric(config):
    """Distance of ``maps.f`` and ``maps.g``, with the optional equivalence and divergence checks.

    Optional sections: ``equivalence {theta2}``, ``bounded {diam}`` and
    ``divergence {n_max, n_min, theta}``.  ``metric.expected {value, tol}``
    adds a row comparing the value to a known one.
    """
    ctx, gauge = _context(config, with_metric=False)
    model, seed, budget = ctx.model, config["seed"], config.get("budget")
    checks, summary = [], {}

    if "maps" in config:
        if "metric" not in config:
            raise E.ConfigError("Missing config section 'metric' for metric.", code="5102",
                                context={"section": "metric"})
        metric = build_metric(config["metric"], model, gauge, budget)
        ctx.metric = metric
        maps = build_maps(config["maps"], ctx)
        f, g = maps["f"], get_value(maps, "g", "maps")
        mv = metric.distance(f, g, seed)
        summary.update(metric=metric.describe(), value=mv.value, tail=mv.tail_bound,
                       upper=mv.upper)
        checks.append(Check("metric_value", "MapMetric.distance",
                            "value plus tail bounds the metric from above", mv.upper, mv.value,
                            "<=", 0.0, {"tail": mv.tail_bound, "budget_used": mv.budget_used}))
        expected = config["metric"].get("expected") if isinstance(config["metric"], dict) else None
        if expected is not None:
            checks.append(Check("expected_value", "MapMetric.distance",
                                "the metric reproduces the known distance",
                                get_number(expected, "value", "metric.expected"), mv.value, "==",
                                get_number(expected, "tol", "metric.expected", 1e-6)))

        if "equivalence" in config:
            if metric.kind == "pointwise":
                raise E.ConfigError("Invalid config value: basepoint equivalence needs a series "
                                    "or weighted metric.", code="5103")
            theta2 = get_point(model, get_value(config["equivalence"], "theta2", "equivalence"),
                               "equivalence")
            checks += basepoint_equivalence_check(metric.kind, metric.theta, theta2, [(f, g)],
                                                  budget, seed, gauge=metric.gauge,
                                                  s=metric.s or 2.0, N=metric.N)
        if "bounded" in config:
            if metric.kind != "series":
                raise E.ConfigError("Invalid config value: the bounded check needs a series "
                                    "metric.", code="5103")
            checks += bounded_equivalence_check(f, g, metric.theta, metric.gauge,
                                                get_number(config["bounded"], "diam", "bounded"),
                                                budget, seed)

    if "divergence" in config:
        div_checks, rows = _divergence_checks(config, model, seed)
        checks += div_checks
        summary["divergence"] = rows
    if not checks:
        raise E.ConfigError("Missing config section 'maps' for metric.", code="5102",
                            context={"section": "maps"})
    return _report("metric", config, checks, summary)


# ---------------------------------------------------------------------------
# witness
# ---------------------------------------------------------------------------

def cmd_witness(config):
    """Build the witness over ``maps.f`` and verify ``members`` members of its ball.

    With ``members = 0`` only the center certification row is reported.
    """
    ctx, _ = _context(config)
    seed = config["seed"]
    f = build_maps(config["maps"], ctx)["f"]
    w = build_witness_spec(config["witness"], f, ctx, seed)
    summary = {"witness": w.describe(), "params": w.params}
    members = int(config["members"])
    if members == 0:
        return _report("witness", config, [certify_center(w, seed)], summary)
    report = verify_witness(w, members, seed, config.get("budget"))
    summary.update(members=members, members_passed=report.passed_count,
                   worst_margin=report.worst_margin)
    return _report("witness", config, report.checks, summary)


# ---------------------------------------------------------------------------
# fixpoint
# ---------------------------------------------------------------------------

def _witness_ball_checks(f, w, theta, max_distance, budget, seed):
    M = w.params.get("M_f")
    if M is None:
        return []
    ball = ball_invariance_check(f, theta, M, budget, seed)
    tol = f.model.tol * max(1.0, M)
    checks = [Check("ball_invariant", "ball_invariance_check",
                    "the witness center maps B(theta, M_f) into itself", tol, ball.worst_margin,
                    "<=", 0.0, {"M_f": M})]
    if max_distance is not None:
        checks.append(Check("iterates_in_ball", "iterate",
                            "Picard iterates of the witness center stay in B(theta, M_f)",
                            M + tol, max_distance, "<=", 0.0, {"M_f": M}))
    return checks


def cmd_fixpoint(config):
    """Picard iteration of ``maps.f`` with the optional audit and witness-ball checks.

    Section ``fixpoint``: ``x0``, ``tol``, ``max_iter``, ``theta``,
    ``expected`` (a point), ``audit {n_max, x1}``.
    """
    ctx, _ = _context(config)
    model, seed, budget = ctx.model, config["seed"], config.get("budget")
    section = config["fixpoint"]
    f = build_maps(config["maps"], ctx)["f"]
    x0 = get_point(model, section.get("x0", model.origin()), "fixpoint")
    theta = get_point(model, section.get("theta", model.origin()), "fixpoint")
    default_tol = config["tolerance"] if config["tolerance"] else FIXPOINT_TOL
    tol = get_number(section, "tol", "fixpoint", default_tol)
    max_iter = section.get("max_iter")

    result = iterate(f, x0, tol, max_iter, theta)
    checks = [Check("converged", "iterate", "Picard iterates of a contraction converge", tol,
                    result.residual, "<=", 0.0,
                    {"iterations": result.iterations, "error_bound": result.error_bound})]
    if "expected" in section:
        expected = get_point(model, section["expected"], "fixpoint")
        checks.append(Check("final_point", "iterate", "the iteration reaches the known fixed point",
                            get_number(section, "expected_tol", "fixpoint", 1e-8),
                            model.dist(result.final_point, expected), "<=", 0.0))
    for w in ctx.witnesses:
        checks += _witness_ball_checks(f, w, theta, result.max_distance, budget, seed)

    summary = result.describe()
    if "audit" in section:
        audit_spec = section["audit"]
        gauge = rakotch_gauges(f, theta, int(get_number(audit_spec, "n_max", "fixpoint.audit")),
                               budget, seed)
        x1 = audit_spec.get("x1")
        x1 = None if x1 is None else get_point(model, x1, "fixpoint.audit")
        audit = rakotch_convergence_audit(f, theta, x0, gauge, tol, x1, max_iter)
        checks += audit.checks
        summary["rakotch_gauges"] = gauge.gauges
    return _report("fixpoint", config, checks, summary, trajectory=result.trajectory_sample)


# ---------------------------------------------------------------------------
# lipschitz-profile
# ---------------------------------------------------------------------------

def _levels(section):
    levels = section.get("levels", [1])
    if not isinstance(levels, list) or not levels or not all(
            isinstance(j, int) and not isinstance(j, bool) and j >= 1 for j in levels):
        raise E.ConfigError(f"Invalid config value: 'levels' must be a list of integers >= 1, "
                            f"got {levels!r}.", code="5103")
    return levels


def _profile_level(f, j, cloud, eps, k_max, theta, budget, seed):
    model = f.model
    a = math.ldexp(1.0, -j)
    net = greedy_separated_net(model, cloud, a)
    g = isometry_patch(f, net, a, eps, theta)
    lip_slack = float(config_manager.load_setting_value("lipschitz_slack"))
    isometric = eps * a / 32.0
    checks = []
    for i, z in enumerate(net.points):
        tag = f"a=2^-{j}:z{i}"
        deviation = model.dist(f(z), g(z))
        checks.append(Check(f"{tag}:patch_deviation", "isometry_patch",
                            "the patch moves points by less than (3 eps/4) max(1, rho(x, theta))",
                            0.75 * eps * max(1.0, model.dist(z, theta)), deviation, "<", 0.0))
        for k in range(k_max):
            r = math.ldexp(1.0, -j - k)
            s = sub_seed(seed, j, i, k)
            patched = local_lipschitz(g, z, r, budget, s).value
            plain = local_lipschitz(f, z, r, budget, s).value
            details = {"a": a, "radius": r, "point": z.tolist()}
            checks.append(Check(f"{tag}:r=2^-{j + k}:patched_nonexpansive", "local_lipschitz",
                                "the patched map is nonexpansive", 1.0 + lip_slack, patched, "<=",
                                0.0, details))
            if r <= isometric:
                checks.append(Check(f"{tag}:r=2^-{j + k}:patched_isometric", "local_lipschitz",
                                    "the patch is isometric on B(z, eps a/32)",
                                    1.0 - PATCH_ISOMETRY_SLACK, patched, ">=", 0.0, details))
            checks.append(Check(f"{tag}:r=2^-{j + k}:unpatched_within_claim", "local_lipschitz",
                                "local Lipschitz constants never exceed the global one",
                                f.claimed_lip + lip_slack, plain, "<=", 0.0, details))
    return checks, len(net)


def cmd_lipschitz_profile(config):
    """Local Lipschitz profile of ``maps.f`` before and after an isometry patch.

    Section ``profile``: ``cloud`` (points or a sampled ball), ``levels``
    (the ``j`` of ``a_j = 2^-j``), ``eps``, ``k_max`` (radii ``2^{-j-k}``,
    ``k < k_max``), ``theta`` and an optional ``witness`` of kind
    ``local_lipschitz``.
    """
    ctx, _ = _context(config)
    model, seed, budget = ctx.model, config["seed"], config.get("budget")
    section = config["profile"]
    f = build_maps(config["maps"], ctx)["f"]
    theta = get_point(model, section.get("theta", model.origin()), "profile")
    eps = get_number(section, "eps", "profile", 0.5)
    k_max = int(get_number(section, "k_max", "profile", 8))
    cloud = build_cloud(get_value(section, "cloud", "profile"), model, seed)

    checks, net_sizes = [], {}
    for j in _levels(section):
        level_checks, size = _profile_level(f, j, cloud, eps, k_max, theta, budget, seed)
        checks += level_checks
        net_sizes[f"2^-{j}"] = size
    summary = {"net_sizes": net_sizes}

    if "witness" in section:
        w = build_witness_spec(section["witness"], f, ctx, seed)
        members = int(config["members"])
        if members == 0:
            checks.append(certify_center(w, seed))
        else:
            report = verify_witness(w, members, seed, budget)
            checks += report.checks
            summary["members_passed"] = report.passed_count
        summary["witness"] = w.describe()
    return _report("lipschitz-profile", config, checks, summary)


COMMANDS = {
    "verify-axioms": cmd_verify_axioms,
    "metric": cmd_metric,
    "witness": cmd_witness,
    "fixpoint": cmd_fixpoint,
    "lipschitz-profile": cmd_lipschitz_profile,
}


def run_experiment(config, command):
    """Validate *config* for *command* and run it."""
    config_manager.validate_experiment(config, command)
    log.debug("running %s with seed %d", command, config["seed"])
    with threads_from(config):
        return COMMANDS[command](config)
