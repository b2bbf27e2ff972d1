"""
nonexp_lab: a numerical laboratory for nonexpansive mappings on hyperbolic spaces.

This module is the public API surface of the package: the space models, the
mapping constructors, the metrics on mapping space, the perturbation and
porosity-witness constructions, Picard iteration, and the settings helpers.

Pipeline overview:
    1. Geometry      : space models with distances and convex combinations
    2. Mappings      : constructor trees with claimed Lipschitz constants
    3. Metrics       : series, weighted-sup and pointwise metrics between maps
    4. Perturbations : map surgery and porosity witnesses with certified members
    5. Fixed points  : Picard iteration and the Rakotch convergence audit

Usage::

    import nonexp_lab as nl

    X = nl.make_model("euclidean", 1)
    f = nl.affine(X, 1.0, [1.0])                       # x + 1
    w = nl.ball_invariance_witness(f, 0.5, X.origin(),
                                   nl.MapMetric.series(X.origin(), nl.make_log_gauge()))
    nl.verify_witness(w, member_count=10).passed     # True
    nl.iterate(w.center_g, X.origin(), 1e-10).converged  # True
"""

from typing import Union

from .utility import config_manager as config_manager
from .utility import error as E
from .utility.checks import Check, all_passed

__version__ = "0.1.0"

from .geometry import (
    AxiomReport, EuclideanSpace, HalfSpace, Hyperboloid2, L1Space, ModelKind, RayShot, SpaceModel,
    ball_sampler, combine, dist, make_model, point_at_distance, verify_hyperbolicity,
)
from .mappings import (
    NonexpMap, affine, compose, cone_map, constant, contract_toward, convex_with_constant,
    empirical_lipschitz, identity, local_lipschitz, modulus_of_continuity, modulus_profile,
    piecewise, rakotch_gauge_estimate, rakotch_gauges,
)
from .metrics import (
    DenseSequence, Gauge, MapMetric, MetricValue, basepoint_equivalence_check,
    bounded_equivalence_check, check_gauge_conditions, d_n_theta, d_theta1_divergence_demo,
    local_from_global, local_from_global_weighted, make_custom_gauge, make_log_gauge,
    make_porosity_power, make_power_gauge, make_table_gauge, pointwise_metric, series_metric,
    weighted_sup_metric,
)
from .perturbations import (
    PorosityWitness, SeparatedNet, ball_invariance_witness, bump_lambda, build_witness,
    enlarge_modulus, greedy_separated_net, isometry_patch, local_lipschitz_witness,
    modcont_witness, piecewise_lipschitz_check, radial_collapse, rakotch_witness, shrink_witness,
    spike_map, verify_witness,
)
from .fixpoint import ball_invariance_check, iterate, rakotch_convergence_audit


# ---------------------------------------------------------------------------
# Settings
# ---------------------------------------------------------------------------

def change_setting(setting: str, new_value: Union[int, float, bool]):
    """Modify a single library setting and persist it to disk.

    The new value must match the type of the factory default (an ``int`` is
    accepted where a float is expected).

    Returns:
        int: ``1`` on success.

    Raises:
        E.ConfigError: unknown key or type mismatch (``5000``), value out of
            range (``5003``).
    """
    return config_manager.save_setting(setting, new_value)


def load_preset(settings: dict):
    """Replace all settings at once with a complete settings dictionary.

    Raises:
        E.ConfigError: unknown or missing keys (``5004``).
    """
    return config_manager.load_preset(settings)


def reset_settings():
    """Restore the factory defaults."""
    return config_manager.reset_settings()


def load_all_settings():
    """Return the complete current settings dictionary."""
    return config_manager.load_setting_value("all")


def load_one_setting(setting):
    """Return the value of a single setting (its factory default when unset)."""
    return config_manager.load_setting_value(setting)
