"""
Perturbation sub-package for nonexp_lab.

- :mod:`constructors`: bump field, radial collapse, spike, modulus lift, nets and isometry patch
- :mod:`witnesses`   : porosity witnesses, their predicates and the verifier
- :mod:`members`     : certified members of a witness ball
"""

from .constructors import (
    BumpField, ModulusLift, NetCollapse, NetPatch, RadialCollapse, SeparatedNet, Spike,
    bump_lambda, enlarge_modulus, greedy_separated_net, isometry_patch, piecewise_lipschitz_check,
    radial_collapse, spike_map,
)
from .members import MEMBER_KINDS, Member, generate_member
from .witnesses import (
    WITNESS_KINDS, BallInvariance, LocalLipAbove, MemberResult, ModulusExceeds, PorosityWitness,
    RakotchGaugeBelowOne, ShrinkPair, WitnessReport, ball_invariance_witness, build_witness,
    certified_distance, certify_center, local_lipschitz_witness, modcont_witness, rakotch_witness,
    shrink_witness, verify_witness,
)
