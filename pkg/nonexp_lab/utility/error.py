"""
Custom exception hierarchy and error code catalog for nonexp_lab.

Exception Hierarchy
-------------------
::

    Exception
      +-- LabError                 # Base: carries message, code, context
           +-- InputError          # Violated preconditions of a library operation
           +-- GeometryError       # Invalid points or unsupported model operations
           +-- GaugeError          # Refused or misused gauges
           +-- WitnessError        # Witness constructions that cannot be built
           +-- ConfigError         # Settings and experiment config failures
           +-- ReportError         # Report serialization failures

Error Code Structure
--------------------
Each code is a 4-digit string.  The first digit identifies the error family:

    1xxx  Input / preconditions
    2xxx  Geometry
    3xxx  Gauges and metrics
    4xxx  Witnesses
    5xxx  Configuration (50xx settings, 51xx experiment files)
    6xxx  Reports
    9xxx  Catch-All

Always import via ``from nonexp_lab.utility import error as E`` and raise
``E.InputError(..., code="1001")``.
"""


class LabError(Exception):
    """Base error for all library failures.

    Attributes:
        message (str): human-readable explanation
        code (str): 4-digit error code (see ERROR_MESSAGES)
        context (dict|None): offending values, kept for reports
    """
    def __init__(self, message, code="9999", context=None):
        super().__init__(message)
        self.message = message
        self.code = code
        self.context = context or {}

    def __str__(self):
        return f"[{self.code}] {self.message}"


class InputError(LabError):
    """Raised when an operation is called outside its preconditions.

    Typical codes: 1000--1099.
    """
    pass


class GeometryError(LabError):
    """Raised for points that are not valid in their model, or operations a
    model does not support (e.g. affine maps on the hyperboloid).

    Typical codes: 2000--2099.
    """
    pass


class GaugeError(LabError):
    """Raised when a gauge is refused by a metric, most importantly a gauge
    without a certified (C4) summability.

    Typical codes: 3000--3099.
    """
    pass


class WitnessError(LabError):
    """Raised when a porosity witness cannot be constructed for the given
    parameters.

    Typical codes: 4000--4099.
    """
    pass


class ConfigError(LabError):
    """Raised for configuration read, write, or validation failures.

    This includes the persistent library settings (50xx) and the experiment
    config files consumed by the CLI (51xx).
    """
    pass


class ReportError(LabError):
    """Raised when a report cannot be serialized or written.

    Typical codes: 6000--6099.
    """
    pass


# ---------------------------------------------------------------------------
# Error-family lookup
# ---------------------------------------------------------------------------
# Maps the first digit of a 4-digit error code to a family name.
# ---------------------------------------------------------------------------
Error_Family = {
    "1": "Input Error",
    "2": "Geometry Error",
    "3": "Gauge Error",
    "4": "Witness Error",
    "5": "Configuration Error",
    "6": "Report Error",
    "9": "Unexpected Error",
}

# ---------------------------------------------------------------------------
# Error message catalog
# ---------------------------------------------------------------------------
# Code structure:
#   1st digit  -> main error family (see Error_Family above)
#   2nd digit  -> component within the family
#   3rd & 4th  -> specific error sequence number
#
# Messages ending with ": " expect the caller to append extra context.
# Do not renumber existing codes: CI scripts match on them.
# ---------------------------------------------------------------------------
ERROR_MESSAGES = {
    # 10xx: geometry preconditions
    "1000": "Dimension mismatch: ",                  # + shapes
    "1001": "Convex combination weight outside [0, 1]: ",
    "1002": "Negative distance requested: ",
    "1003": "Radius must be positive: ",
    "1004": "Sample count must be at least 1.",
    "1005": "Model dimension out of range: ",
    # 11xx: mapping preconditions
    "1100": "Map belongs to a different model.",
    "1101": "Contraction weight gamma must lie in (0, 1): ",
    "1102": "Estimator parameter must be positive: ",
    "1103": "Map is not nonexpansive: ",             # + claimed lip
    "1104": "Affine map does not preserve the model: ",
    "1105": "Composition of maps from different models.",
    # 12xx: metric preconditions
    "1200": "Truncation N must be at least 1.",
    "1201": "Weight exponent s must be at least 1: ",
    "1202": "Empty list of map pairs.",
    "1203": "Divergence demo needs n_max >= 3.",
    "1204": "Index m must be at least 1.",
    # 13xx: perturbation preconditions
    "1300": "Bump parameters must be positive.",
    "1301": "Points x0 and y0 are not at distance t0: ",
    "1302": "Spike weight lam must lie in (0, 1): ",
    "1303": "Claimed Lipschitz constant too large for enlarge_modulus: ",
    "1304": "Net is not a-separated: ",
    "1305": "Net needs at least two points.",
    "1306": "Parameters a and eps must lie in (0, 1).",
    "1307": "Empty point cloud.",
    "1308": "Shrink witness needs x != y.",
    "1309": "Member count must be at least 1.",
    # 14xx: fixpoint preconditions
    "1400": "Tolerance must be positive.",
    "1401": "max_iter must be at least 1.",
    "1402": "Rakotch gauge was computed for a different map.",

    # 2xxx: geometry
    "2000": "Point is not valid in model: ",
    "2001": "Unknown model kind: ",
    "2002": "Operation not supported by model: ",

    # 3xxx: gauges
    "3000": "Gauge fails (C4) and has no summable majorant; refusing series metric.",
    "3001": "Argument outside gauge domain: ",
    "3002": "Unknown gauge kind: ",
    "3003": "Gauge table must be strictly increasing.",
    "3004": "Unknown metric kind: ",

    # 4xxx: witnesses
    "4000": "Radius r outside admissible range: ",
    "4001": "No dense-sequence point close enough within the search limit.",
    "4002": "Base map must be nonexpansive.",
    "4003": "Unknown witness kind: ",
    "4004": "Metric kind not supported by this witness: ",
    "4005": "Net has no point inside the ball B(theta, n).",

    # 50xx: library settings
    "5000": "Type mismatch of setting: ",
    "5002": "Could not save config file.",
    "5003": "Setting value out of range: ",
    "5004": "Preset keys do not match the settings: ",
    # 51xx: experiment config files
    "5100": "Experiment config could not be read: ",
    "5101": "Unsupported schema_version: ",
    "5102": "Missing config section: ",
    "5103": "Invalid config value: ",
    "5104": "Unknown map constructor: ",
    "5105": "Unknown subcommand: ",

    # 6xxx: reports
    "6000": "Unknown report format: ",
    "6001": "Could not write report: ",

    # 9999 catch all
    "9999": "Unexpected Error: ",
}
