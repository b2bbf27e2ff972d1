"""Check rows shared by every verification in the package.

A :class:`Check` compares a measured value against a bound in a stated
direction, with a slack.  Reports are lists of checks; the CLI writes one
row per check.
"""

from dataclasses import dataclass, field

from . import error as E

_DIRECTIONS = ("<=", "<", ">=", ">", "==")


@dataclass(frozen=True)
class Check:
    """One verified inequality.

    Attributes:
        name:      short identifier of the check.
        operation: library operation that produced the measurement.
        anchor:    the guarantee being checked, in words.
        bound:     the claimed bound.
        measured:  the measured value.
        direction: ``measured <direction> bound`` must hold.
        slack:     tolerance; for strict directions it is a margin that must be exceeded.
        details:   extra values echoed in reports.
    """
    name: str
    operation: str
    anchor: str
    bound: float
    measured: float
    direction: str = "<="
    slack: float = 0.0
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.direction not in _DIRECTIONS:
            raise E.LabError(f"Unexpected Error: unknown check direction {self.direction!r}")

    @property
    def margin(self):
        """Signed distance to failure; positive means the inequality holds."""
        if self.direction in ("<=", "<"):
            return float(self.bound) - float(self.measured)
        if self.direction in (">=", ">"):
            return float(self.measured) - float(self.bound)
        return -abs(float(self.measured) - float(self.bound))

    @property
    def passed(self):
        m = self.margin
        if self.direction in ("<", ">"):
            return m > self.slack
        return m >= -self.slack


def all_passed(checks):
    return all(c.passed for c in checks)
