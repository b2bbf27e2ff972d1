"""
Fixed-point sub-package for nonexp_lab.

- :mod:`iteration`: Picard iteration, ball invariance and the Rakotch convergence audit
"""

from .iteration import (
    BallCheck, FixedPointReport, RakotchAudit, ball_invariance_check, iterate,
    rakotch_convergence_audit,
)
