"""
Admissible gauges for the series metric.

A gauge is a continuous strictly increasing ``phi`` on ``(0, 1)`` or
``(0, 1]`` with an explicit inverse and the constants the metric and the
witnesses need:

- ``eta``    the concavity bound of condition (C1)
- ``C_phi``  ``max(1, sum n * phi_inv(1/n))`` from condition (C4)
- ``C_k(k)`` the constants of condition (C3)
- ``tail(N)`` a certified bound on ``sum_{n > N} phi_inv(1/n)``

Built-in gauges:

======================  ===================  ==================
factory                 phi(t)               phi_inv(t)
======================  ===================  ==================
make_log_gauge()        -1 / log2(t)         2^(-1/t)
make_power_gauge()      t^(1/4)              t^4
make_porosity_power(s)  t^(1/s)              t^s
make_custom_gauge(...)  user callables       user callables
make_table_gauge(...)   interpolated table   interpolated table
======================  ===================  ==================

Usage::

    from nonexp_lab.metrics import check_gauge_conditions, make_log_gauge

    g = make_log_gauge()
    g.phi(0.5), g.phi_inv(1 / 3), g.C_phi       # 1.0, 0.125, 2.0
    check_gauge_conditions(g, 200).all_passed   # True
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..utility import config_manager
from ..utility import error as E
from ..utility.utility import get_logger

log = get_logger(__name__)

# partial sums for C_phi run to this index before the tail bound takes over
C_PHI_PARTIAL_N = 200
C_PHI_PARTIAL_N_POWER = 10_000
# (C3) is checked for k <= C3_MAX_K and m <= C3_MAX_M
C3_MAX_K = 16
C3_MAX_M = 1000
# log gauge grids start here; phi_inv underflows much below
LOG_GRID_T_MIN = 1e-3
CONDITION_TOL = 1e-12


def _apply(fn, values):
    """Apply a possibly scalar-only callable to an array."""
    arr = np.asarray(values, dtype=float)
    try:
        out = np.asarray(fn(arr), dtype=float)
        if out.shape == arr.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(float(v))) for v in arr.reshape(-1)]).reshape(arr.shape)


class Gauge:
    """An admissible gauge.

    Attributes:
        kind (str): ``log``, ``power``, ``porosity_power``, ``custom`` or ``table``.
        label (str): human readable description.
        domain_closed (bool): domain is ``(0, 1]`` rather than ``(0, 1)``.
        eta (float): concavity bound of (C1).
        C_phi (float): ``max(1, sum n phi_inv(1/n))``; ``inf`` when (C4) fails.
        flags (dict): ``C1`` .. ``C5`` -> bool, as established at construction.
        default_N (int): truncation used by the series metric when none is given.
    """

    def __init__(self, kind, label, phi, phi_inv, *, domain_closed, eta, C_phi, tail, c_k, flags,
                 default_N, range_max=math.inf, majorant=None):
        self.kind = kind
        self.label = label
        self._phi = phi
        self._phi_inv = phi_inv
        self.domain_closed = domain_closed
        self.eta = float(eta)
        self.C_phi = float(C_phi)
        self._tail = tail
        self._c_k = c_k
        self.flags = dict(flags)
        self.default_N = int(default_N)
        self.range_max = range_max
        self.majorant = majorant

    # -- evaluation -------------------------------------------------------

    def _check_domain(self, t):
        arr = np.asarray(t, dtype=float)
        upper_ok = arr <= 1.0 if self.domain_closed else arr < 1.0
        if not np.all((arr > 0.0) & upper_ok):
            raise E.GaugeError(f"Argument outside gauge domain: {t!r} not in "
                               f"(0, 1{']' if self.domain_closed else ')'}", code="3001")

    def phi(self, t):
        self._check_domain(t)
        out = _apply(self._phi, t)
        return float(out) if out.ndim == 0 else out

    def phi_inv(self, t):
        arr = np.asarray(t, dtype=float)
        if not np.all((arr > 0.0) & (arr <= self.range_max)):
            raise E.GaugeError(f"Argument outside gauge domain: phi_inv({t!r})", code="3001")
        out = _apply(self._phi_inv, arr)
        return float(out) if out.ndim == 0 else out

    # -- constants --------------------------------------------------------

    @property
    def summable(self):
        """(C4) holds and the tail of the series is certified."""
        return bool(self.flags.get("C4")) and self._tail is not None

    def tail(self, N):
        """Certified bound on ``sum_{n > N} phi_inv(1/n)``.

        Raises:
            E.GaugeError: the gauge has no certified tail (code ``3000``).
        """
        if not self.summable:
            raise E.GaugeError("Gauge fails (C4) and has no summable majorant; refusing series "
                               f"metric ({self.label}).", code="3000")
        return float(self._tail(int(N)))

    def weights(self, N):
        """``phi_inv(1/n)`` for ``n = 1..N``."""
        n = np.arange(1, int(N) + 1, dtype=float)
        return self.phi_inv(1.0 / n)

    def sum_from(self, N, upto=None):
        """``sum_{n >= N} phi_inv(1/n)``: partial sum to *upto* plus the certified tail."""
        upto = max(self.default_N, N) if upto is None else upto
        n = np.arange(int(N), int(upto) + 1, dtype=float)
        return float(np.sum(self.phi_inv(1.0 / n))) + self.tail(upto)

    def C_k(self, k):
        if self._c_k is None:
            return None
        return float(self._c_k(int(k)))

    @property
    def r0(self):
        """``min(1, phi(eta))``, the admissible radius bound of the series witnesses."""
        return min(1.0, self.phi(self.eta))

    def describe(self):
        return {"kind": self.kind, "label": self.label, "eta": self.eta, "C_phi": self.C_phi}

    def __repr__(self):
        return f"Gauge({self.label}, C_phi={self.C_phi:.10g})"


# ---------------------------------------------------------------------------
# Factories
# ---------------------------------------------------------------------------

def _log_phi(t):
    return -1.0 / np.log2(t)


def _log_phi_inv(t):
    return np.exp2(-1.0 / np.asarray(t, dtype=float))


def make_log_gauge():
    """``phi(t) = -1/log2(t)`` on (0, 1), ``phi_inv(t) = 2^(-1/t)``.

    ``eta = e^-2``, ``C_k = 2^k`` and ``C_phi = sum n 2^-n = 2`` (partial
    sum plus the closed-form tail ``(N+2) 2^-N``).  All of (C1)-(C5) hold,
    (C5) with equality.
    """
    n = np.arange(1, C_PHI_PARTIAL_N + 1, dtype=float)
    partial = float(np.sum(n * np.exp2(-n)))
    C_phi = max(1.0, partial + (C_PHI_PARTIAL_N + 2) * math.ldexp(1.0, -C_PHI_PARTIAL_N))
    return Gauge("log", "LogGauge", _log_phi, _log_phi_inv, domain_closed=False,
                 eta=math.exp(-2.0), C_phi=C_phi,
                 tail=lambda N: math.ldexp(1.0, -N),
                 c_k=lambda k: math.ldexp(1.0, k),
                 flags={"C1": True, "C2": True, "C3": True, "C4": True, "C5": True},
                 default_N=config_manager.load_setting_value("series_truncation_log"))


def _power_family(s, kind, label):
    """``t^(1/s)`` with inverse ``t^s``; (C4) iff ``s > 2``."""
    summable = s > 2.0
    if summable:
        n = np.arange(1, C_PHI_PARTIAL_N_POWER + 1, dtype=float)
        partial = float(np.sum(n ** (1.0 - s)))
        # integral comparison: sum_{n>N} n^(1-s) <= N^(2-s) / (s-2)
        C_phi = max(1.0, partial + C_PHI_PARTIAL_N_POWER ** (2.0 - s) / (s - 2.0))
        tail = lambda N: N ** (1.0 - s) / (s - 1.0)  # noqa: E731
    else:
        C_phi, tail = math.inf, None
    gauge = Gauge(kind, label, lambda t: np.asarray(t, dtype=float) ** (1.0 / s),
                  lambda t: np.asarray(t, dtype=float) ** s, domain_closed=True, eta=1.0,
                  C_phi=C_phi, tail=tail, c_k=lambda k: (1.0 + k) ** s,
                  flags={"C1": True, "C2": True, "C3": True, "C4": summable, "C5": False},
                  default_N=config_manager.load_setting_value("series_truncation_power"),
                  range_max=1.0)
    gauge.flags["C5"] = check_c5(gauge).passed
    return gauge


def make_power_gauge():
    """``phi(t) = t^(1/4)`` on (0, 1]; ``C_phi = sum n^-3``, ``C_k = (1+k)^4``.

    (C5) is evaluated on a grid and recorded as found.
    """
    return _power_family(4.0, "power", "PowerGauge(1/4)")


def make_porosity_power(s):
    """``psi_s(t) = t^(1/s)`` used by the weighted witnesses; satisfies (C4) iff ``s > 2``.

    Raises:
        E.InputError: ``s < 1`` (code ``1201``).
    """
    if not s >= 1:
        raise E.InputError(f"Weight exponent s must be at least 1: {s!r}", code="1201")
    return _power_family(float(s), "porosity_power", f"PorosityPower({s:g})")


def make_custom_gauge(phi, phi_inv, *, eta=None, majorant=None, c_k=None, domain_closed=False,
                      label="Custom", kind="custom", range_max=math.inf):
    """A gauge from callables.

    Args:
        phi, phi_inv: the gauge and its inverse; scalar or vectorized callables.
        eta:          (C1) bound; defaults to the largest grid ``t`` with ``phi(t) >= t``.
        majorant:     callable ``N -> bound of sum_{n > N} n phi_inv(1/n)``.  Without
            one the gauge is usable for evaluation but refused by the series metric.
        c_k:          callable ``k -> C_k`` for (C3); estimated when omitted.
        domain_closed: domain ``(0, 1]`` instead of ``(0, 1)``.

    Condition flags are taken from :func:`check_gauge_conditions`.
    """
    N0 = int(config_manager.load_setting_value("series_truncation_power"))
    if eta is None:
        grid = np.linspace(1e-3, 1.0 if domain_closed else 1.0 - 1e-3, 1000)
        vals = _apply(phi, grid)
        ok = grid[vals >= grid]
        eta = float(ok.max()) if ok.size else float(grid[0])
    tail = None
    if majorant is not None:
        tail = lambda N: float(majorant(N))  # noqa: E731 - n * phi_inv >= phi_inv
    gauge = Gauge(kind, label, phi, phi_inv,
                  domain_closed=domain_closed, eta=eta, C_phi=math.inf, tail=tail, c_k=c_k,
                  flags={}, default_N=N0, range_max=range_max, majorant=majorant)
    report = check_gauge_conditions(gauge, 200)
    gauge.flags = report.flags
    if majorant is not None:
        gauge.flags["C4"] = report.results["C4"].passed
    if gauge.flags["C4"]:
        n = np.arange(1, N0 + 1, dtype=float)
        partial = float(np.sum(n * _apply(phi_inv, 1.0 / n)))
        extra = float(majorant(N0)) if majorant is not None else 0.0
        gauge.C_phi = max(1.0, partial + extra)
    log.debug("custom gauge %s flags %s", label, gauge.flags)
    return gauge


def make_table_gauge(ts, phis, majorant=None, eta=None):
    """A gauge interpolating the table ``phi(ts[i]) = phis[i]``, monotone piecewise linear.

    The table is extended by ``phi(0) = 0``.  It must end at ``t = 1`` with
    ``phi(1) >= 1``, so the domain is (0, 1] and ``phi`` reaches 1.

    Raises:
        E.GaugeError: a column is not strictly increasing or the table does
            not cover (0, 1] (code ``3003``).
    """
    ts = np.asarray(ts, dtype=float)
    phis = np.asarray(phis, dtype=float)
    if ts.ndim != 1 or ts.shape != phis.shape or ts.size < 2 or np.any(np.diff(ts) <= 0) \
            or np.any(np.diff(phis) <= 0) or ts[0] <= 0 or phis[0] <= 0 \
            or ts[-1] != 1.0 or phis[-1] < 1.0:
        raise E.GaugeError("Gauge table must be strictly increasing.", code="3003",
                           context={"ts": ts.tolist(), "phis": phis.tolist()})
    xt = np.concatenate([[0.0], ts])
    yt = np.concatenate([[0.0], phis])
    return make_custom_gauge(lambda t: np.interp(t, xt, yt), lambda y: np.interp(y, yt, xt),
                             eta=eta, majorant=majorant, domain_closed=True,
                             label=f"Custom(table, {ts.size} rows)", kind="table",
                             range_max=float(phis[-1]))


# ---------------------------------------------------------------------------
# Condition checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionResult:
    """One checked condition.

    ``residual`` is the largest violation found (``<= 0`` or tiny when
    passing); ``witness`` is the argument attaining it.
    """
    name: str
    passed: bool
    residual: float
    witness: object = None
    note: str = ""


@dataclass
class GaugeConditionReport:
    gauge: str
    grid: int
    results: dict = field(default_factory=dict)

    @property
    def flags(self):
        return {k: v.passed for k, v in self.results.items() if k.startswith("C")}

    @property
    def all_passed(self):
        return all(r.passed for r in self.results.values())

    def passed(self, name):
        return self.results[name].passed


def _t_grid(g, count, upper=None):
    lo = LOG_GRID_T_MIN if g.kind == "log" else 1.0 / (count + 1)
    hi = upper if upper is not None else (1.0 if g.domain_closed else 1.0 - 1.0 / (count + 1))
    return np.linspace(lo, hi, count)


def _check_inverse(g, count):
    ts = _t_grid(g, count)
    vals = g.phi(ts)
    back = g.phi(np.clip(g.phi_inv(vals), ts[0] * 0.5, ts[-1]))
    resid = np.abs(back - vals)
    i = int(np.argmax(resid))
    inc = np.diff(vals)
    j = int(np.argmin(inc))
    return [ConditionResult("inverse", bool(resid[i] <= 1e-10), float(resid[i]), float(ts[i])),
            ConditionResult("monotone", bool(inc[j] > 0), float(-inc[j]), float(ts[j]))]


def _check_c1(g, count):
    hi = g.eta
    ts = np.linspace(min(LOG_GRID_T_MIN, hi / (count + 1)), hi, count)
    vals = g.phi(ts)
    second = vals[:-2] + vals[2:] - 2.0 * vals[1:-1]
    i = int(np.argmax(second)) if second.size else 0
    worst = float(second[i]) if second.size else 0.0
    eta_ok = g.phi(g.eta) >= g.eta - CONDITION_TOL
    note = "" if eta_ok else f"phi(eta) = {g.phi(g.eta):.6g} < eta = {g.eta:.6g}"
    return ConditionResult("C1", bool(worst <= CONDITION_TOL and eta_ok), worst,
                           float(ts[i + 1]) if second.size else g.eta, note)


def _check_c2(g, count):
    ns = np.unique(np.geomspace(1, min(max(count, 10), 1000), num=min(count, 60)).astype(int))
    ts = g.phi_inv(1.0 / ns)
    worst, witness = 0.0, None
    for n, t in zip(ns, np.atleast_1d(ts)):
        if not t > 0:
            return ConditionResult("C2", False, math.inf, int(n), "phi_inv(1/n) is not positive")
        err = abs(g.phi(t) - 1.0 / n)
        if err > worst:
            worst, witness = err, int(n)
    t1 = g.phi_inv(1.0)
    one = g.phi(t1) if (t1 < 1.0 or (t1 <= 1.0 and g.domain_closed)) else math.inf
    err1 = abs(one - 1.0)
    ok = worst <= 1e-10 and err1 <= 1e-10
    return ConditionResult("C2", bool(ok), max(worst, err1), witness if worst >= err1 else 1,
                           f"phi({t1:.6g}) = 1")


def _check_c3(g):
    m = np.arange(1, C3_MAX_M + 1, dtype=float)
    lhs = g.phi_inv(1.0 / m)
    worst, witness, estimated = -math.inf, None, {}
    for k in range(1, C3_MAX_K + 1):
        rhs = g.phi_inv(1.0 / (k + m))
        valid = lhs > 0
        if g.C_k(k) is None:
            ratio = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), math.inf)
            estimated[k] = float(np.max(ratio[valid]))
            continue
        rel = (lhs - g.C_k(k) * rhs)[valid] / lhs[valid]
        i = int(np.argmax(rel))
        if rel[i] > worst:
            worst, witness = float(rel[i]), (k, int(m[valid][i]))
    if estimated:
        finite = all(math.isfinite(v) for v in estimated.values())
        return ConditionResult("C3", finite, 0.0 if finite else math.inf, estimated,
                               "C_k estimated from sampled ratios")
    return ConditionResult("C3", bool(worst <= CONDITION_TOL), worst, witness)


def _check_c4(g):
    N = g.default_N if g.kind in ("log",) else C_PHI_PARTIAL_N_POWER
    n = np.arange(1, N + 1, dtype=float)
    terms = n * g.phi_inv(1.0 / n)
    if g.majorant is not None:
        # majorant(K) must dominate the sampled stretch of the tail beyond K
        for K in (1, 10, 100, 1000):
            stretch = float(np.sum(terms[K:]))
            if stretch > g.majorant(K) * (1.0 + CONDITION_TOL):
                return ConditionResult("C4", False, stretch - g.majorant(K), K,
                                       "majorant below a partial tail")
        return ConditionResult("C4", True, 0.0, None, "certified by majorant")
    if g._tail is not None:
        partial = float(np.sum(terms))
        ok = g.C_phi >= partial - CONDITION_TOL and g.C_phi >= 1.0
        return ConditionResult("C4", bool(ok), partial - g.C_phi, N, "analytic tail")
    # dyadic blocks of the series must shrink for the series to converge
    blocks = [float(np.sum(terms[(1 << j) - 1:(1 << (j + 1)) - 1])) for j in range(13)]
    ratios = [blocks[j + 1] / blocks[j] for j in range(len(blocks) - 1) if blocks[j] > 0]
    tail_ratio = max(ratios[-4:]) if ratios else 0.0
    ok = tail_ratio < 0.9
    witness = {"block": len(blocks) - 1, "block_sum": blocks[-1], "growth": tail_ratio}
    return ConditionResult("C4", bool(ok), tail_ratio, witness,
                           "" if ok else "dyadic block sums of n*phi_inv(1/n) do not decay")


def check_c5(g, count=12):
    """(C5): ``phi_inv(t/(a+b)) <= phi_inv(t/a) phi_inv(t/b)`` for ``a, b >= 1``, t in (0, 1).

    The residual is relative; it is also the equality residual when the
    inequality is tight.
    """
    ts = np.linspace(0.1, 0.9, count)
    ab = np.linspace(1.0, 10.0, count)
    worst, witness = -math.inf, None
    for a in ab:
        for b in ab:
            lhs = g.phi_inv(ts / (a + b))
            rhs = g.phi_inv(ts / a) * g.phi_inv(ts / b)
            scale = np.maximum(np.maximum(lhs, rhs), 1e-300)
            rel = (lhs - rhs) / scale
            i = int(np.argmax(rel))
            if rel[i] > worst:
                worst, witness = float(rel[i]), (float(ts[i]), float(a), float(b))
    return ConditionResult("C5", bool(worst <= CONDITION_TOL), worst, witness)


def _check_phi_inv_convexity(g, count):
    a_max = min(g.phi(g.eta), g.range_max)
    worst, witness = -math.inf, None
    for a in np.linspace(a_max / count, a_max, count):
        ts = np.linspace(1.0 / count, 1.0 - 1.0 / count, count)
        lhs = g.phi_inv(a * ts)
        rhs = ts * g.phi_inv(a)
        rel = (lhs - rhs) / np.maximum(rhs, 1e-300)
        i = int(np.argmax(rel))
        if rel[i] > worst:
            worst, witness = float(rel[i]), (float(a), float(ts[i]))
    return ConditionResult("phi_inv_convexity", bool(worst <= 1e-9), worst, witness)


def check_gauge_conditions(g, sample_grid=200):
    """Check (C1)-(C5), inverse consistency and convexity of ``phi_inv`` on grids.

    Args:
        g:           the gauge.
        sample_grid: grid size, at least 10.

    Returns:
        GaugeConditionReport: one :class:`ConditionResult` per condition;
        failures carry the argument that violated the condition.
    """
    if sample_grid < 10:
        raise E.InputError("Sample count must be at least 1.", code="1004",
                           context={"sample_grid": sample_grid})
    report = GaugeConditionReport(g.label, int(sample_grid))
    for result in _check_inverse(g, sample_grid):
        report.results[result.name] = result
    report.results["C1"] = _check_c1(g, sample_grid)
    report.results["C2"] = _check_c2(g, sample_grid)
    report.results["C3"] = _check_c3(g)
    report.results["C4"] = _check_c4(g)
    report.results["C5"] = check_c5(g)
    report.results["phi_inv_convexity"] = _check_phi_inv_convexity(g, min(sample_grid, 50))
    log.debug("gauge %s conditions: %s", g.label, report.flags)
    return report
