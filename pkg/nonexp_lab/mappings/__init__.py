"""
Mapping sub-package for nonexp_lab.

- :mod:`map_nodes`  : constructor-tree node types (the provenance of a map)
- :mod:`nonexp_map` : :class:`NonexpMap` and the combinators
- :mod:`estimators` : sampled Lipschitz, modulus and Rakotch gauge estimators
"""

from .nonexp_map import (
    LIP_ROUNDING, NonexpMap, affine, compose, cone_map, constant, contract_toward,
    convex_with_constant, eval, identity, piecewise, require_nonexpansive,
)
from .estimators import (
    LipEstimate, RakotchGauge, empirical_lipschitz, local_lipschitz, modulus_of_continuity,
    modulus_profile, rakotch_gauge_estimate, rakotch_gauges,
)
