"""
Geometry sub-package for nonexp_lab.

- :mod:`spaces`  : the space models (Euclidean, half-space, l1, hyperboloid)
- :mod:`sampling`: ball sampling and the convex-combination axiom verifier
"""

from .spaces import (
    AxiomReport, EuclideanSpace, HalfSpace, Hyperboloid2, L1Space, ModelKind, RayShot,
    SpaceModel, combine, dist, make_model, minkowski, point_at_distance,
)
from .sampling import ball_sampler, verify_hyperbolicity
