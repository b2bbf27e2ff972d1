"""
Tests for gauges, dense sequences and the metrics on mapping space.

Coverage areas
--------------
- Log, power, porosity-power, custom and table gauges; condition checks
- Dense sequence enumeration and nearest-point search
- Series, weighted-sup and pointwise metrics, MapMetric dispatch
- Local versus global distance bounds
- Basepoint and bounded-space equivalence checks
- The d_{theta,1} divergence demonstration
"""

import math

import numpy as np
import pytest
from scipy.special import zeta

import nonexp_lab
from nonexp_lab.cli.specs import build_gauge
from nonexp_lab.metrics import gauges as G
from nonexp_lab.metrics import map_metrics as MM
from nonexp_lab.metrics.dense import ENUMERATION_VERSION
from nonexp_lab.utility import error as E


@pytest.fixture
def zero_and_one(line):
    return nonexp_lab.constant(line, [0.0]), nonexp_lab.constant(line, [1.0])


# ---------------------------------------------------------------------------
# 1) Gauges
# ---------------------------------------------------------------------------

def test_log_gauge_values(log_gauge):
    assert log_gauge.phi(0.5) == pytest.approx(1.0)
    assert log_gauge.phi_inv(1.0 / 3.0) == pytest.approx(0.125)
    assert log_gauge.eta == pytest.approx(math.exp(-2.0))
    assert log_gauge.C_phi == pytest.approx(2.0)
    assert log_gauge.C_k(3) == 8.0
    assert log_gauge.tail(10) == pytest.approx(2.0 ** -10)
    assert log_gauge.default_N == 60
    assert all(log_gauge.flags[c] for c in ("C1", "C2", "C3", "C4", "C5"))


def test_log_gauge_vectorized(log_gauge):
    out = log_gauge.phi_inv(np.array([1.0, 0.5, 0.25]))
    assert np.allclose(out, [0.5, 0.25, 1.0 / 16.0])


@pytest.mark.parametrize("t", [0.0, 1.0, -0.5])
def test_log_gauge_domain(log_gauge, t):
    with pytest.raises(E.GaugeError) as exc:
        log_gauge.phi(t)
    assert exc.value.code == "3001"


def test_log_gauge_r0(log_gauge):
    assert log_gauge.r0 == pytest.approx(math.log(2.0) / 2.0)


def test_log_gauge_sum_from(log_gauge):
    assert log_gauge.sum_from(1) == pytest.approx(1.0)
    assert log_gauge.sum_from(4) == pytest.approx(0.125)


def test_power_gauge():
    g = nonexp_lab.make_power_gauge()
    assert g.phi(1.0) == pytest.approx(1.0)
    assert g.phi(1.0 / 16.0) == pytest.approx(0.5)
    assert g.C_phi == pytest.approx(1.2020569031595942, rel=1e-6)
    assert g.C_k(1) == pytest.approx(16.0)
    assert g.summable


@pytest.mark.parametrize("s", [3.0, 4.0, 6.0])
def test_porosity_power_constant_matches_zeta(s):
    # sum n * n^-s = zeta(s - 1); the computed value is an upper bound
    exact = float(zeta(s - 1.0))
    C_phi = nonexp_lab.make_porosity_power(s).C_phi
    assert exact <= C_phi <= exact + G.C_PHI_PARTIAL_N_POWER ** (1.0 - s)


def test_porosity_power_summability():
    assert nonexp_lab.make_porosity_power(3).summable
    assert not nonexp_lab.make_porosity_power(2).summable
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.make_porosity_power(0.5)
    assert exc.value.code == "1201"


def test_check_gauge_conditions_on_log_gauge(log_gauge):
    report = nonexp_lab.check_gauge_conditions(log_gauge)
    assert report.passed("C2")
    assert report.passed("C4")
    assert report.passed("inverse")
    assert report.passed("monotone")


def test_check_gauge_conditions_grid_too_small(log_gauge):
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.check_gauge_conditions(log_gauge, sample_grid=5)
    assert exc.value.code == "1004"


def test_identity_table_gauge_fails_c4():
    g = nonexp_lab.make_table_gauge([0.5, 1.0], [0.5, 1.0])
    assert g.phi(0.25) == pytest.approx(0.25)
    assert not g.flags["C4"]
    assert not g.summable
    report = nonexp_lab.check_gauge_conditions(g)
    assert not report.passed("C4")
    assert not report.all_passed


def test_table_gauge_eta():
    assert nonexp_lab.make_table_gauge([0.5, 1.0], [0.5, 1.0]).eta == pytest.approx(1.0)
    assert nonexp_lab.make_table_gauge([0.5, 1.0], [0.5, 1.0], eta=0.25).eta == 0.25
    spec = {"kind": "table", "ts": [0.5, 1.0], "phis": [0.5, 1.0], "eta": 0.25}
    assert build_gauge(spec).eta == 0.25


def test_table_gauge_without_majorant_is_refused_by_series_metric():
    g = nonexp_lab.make_table_gauge([0.5, 1.0], [0.5, 1.0])
    with pytest.raises(E.GaugeError) as exc:
        nonexp_lab.MapMetric.series([0.0], g)
    assert exc.value.code == "3000"
    with pytest.raises(E.GaugeError) as exc:
        g.tail(10)
    assert exc.value.code == "3000"


@pytest.mark.parametrize("ts, phis", [
    ([0.5, 0.9], [0.5, 1.0]),        # does not reach t = 1
    ([0.5, 1.0], [0.5, 0.8]),        # phi(1) < 1
    ([0.5, 0.4, 1.0], [0.1, 0.2, 1.0]),
])
def test_table_gauge_rejects_bad_tables(ts, phis):
    with pytest.raises(E.GaugeError) as exc:
        nonexp_lab.make_table_gauge(ts, phis)
    assert exc.value.code == "3003"


def test_custom_gauge_with_majorant():
    g = nonexp_lab.make_custom_gauge(G._log_phi, G._log_phi_inv, eta=math.exp(-2.0),
                                     majorant=lambda N: (N + 2) * 2.0 ** -N,
                                     c_k=lambda k: 2.0 ** k, label="LogCopy")
    assert g.summable
    assert g.C_phi == pytest.approx(2.0, rel=1e-9)
    assert g.kind == "custom"


# ---------------------------------------------------------------------------
# 2) Dense sequences
# ---------------------------------------------------------------------------

def test_dense_sequence_starts_at_origin(line):
    seq = nonexp_lab.DenseSequence(line)
    assert np.array_equal(seq.prefix(3)[:, 0], [0.0, -1.0, 1.0])
    assert np.array_equal(seq[0], [0.0])
    assert seq.version == ENUMERATION_VERSION == 1


def test_dense_sequence_is_reproducible(plane):
    a = nonexp_lab.DenseSequence(plane).prefix(40)
    b = nonexp_lab.DenseSequence(plane).prefix(40)
    assert np.array_equal(a, b)
    assert len({tuple(p) for p in a}) == 40


def test_dense_sequence_find_near(line):
    seq = nonexp_lab.DenseSequence(line)
    i = seq.find_near([0.3], 0.26, 1000)
    assert abs(seq[i][0] - 0.3) < 0.26


def test_dense_sequence_find_near_gives_up(line):
    seq = nonexp_lab.DenseSequence(line)
    with pytest.raises(E.WitnessError) as exc:
        seq.find_near([1000.0], 0.1, 10)
    assert exc.value.code == "4001"


def test_dense_sequence_on_hyperboloid(hyperbolic):
    pts = nonexp_lab.DenseSequence(hyperbolic).prefix(20)
    assert np.allclose(pts[0], hyperbolic.origin())
    for p in pts:
        hyperbolic.validate(p)


# ---------------------------------------------------------------------------
# 3) Metrics
# ---------------------------------------------------------------------------

def test_series_metric_of_constants(zero_and_one, log_gauge):
    f, g = zero_and_one
    mv = nonexp_lab.series_metric(f, g, [0.0], log_gauge, budget=64, seed=0)
    assert mv.value == pytest.approx(0.5, abs=1e-12)
    assert mv.tail_bound == pytest.approx(2.0 ** -60)
    assert mv.upper >= mv.value


def test_series_metric_is_symmetric_and_zero_on_diagonal(half_contraction, translation, log_gauge):
    a = nonexp_lab.series_metric(half_contraction, translation, [0.0], log_gauge, 20, 64, 1)
    b = nonexp_lab.series_metric(translation, half_contraction, [0.0], log_gauge, 20, 64, 1)
    assert a.value == pytest.approx(b.value)
    assert nonexp_lab.series_metric(translation, translation, [0.0], log_gauge, 20, 64).value == 0.0


def test_series_metric_truncation(zero_and_one, log_gauge):
    f, g = zero_and_one
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.series_metric(f, g, [0.0], log_gauge, N=0, budget=16)
    assert exc.value.code == "1200"


def test_series_metric_different_models(translation, plane, log_gauge):
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.series_metric(translation, nonexp_lab.identity(plane), [0.0], log_gauge)
    assert exc.value.code == "1100"


def test_weighted_metric_of_constants(zero_and_one):
    f, g = zero_and_one
    mv = nonexp_lab.weighted_sup_metric(f, g, [0.0], 2.0, budget=200, seed=0)
    assert mv.value == pytest.approx(1.0)
    assert mv.tail_bound >= 0.0


def test_weighted_metric_exponent(zero_and_one):
    f, g = zero_and_one
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.weighted_sup_metric(f, g, [0.0], 0.5)
    assert exc.value.code == "1201"


def test_weighted_tail_bound_for_s_one():
    assert MM.weighted_tail_bound(1.0, 0.0, 100.0) == 2.0


def test_pointwise_metric_of_constants(zero_and_one, line):
    f, g = zero_and_one
    mv = nonexp_lab.pointwise_metric(f, g, nonexp_lab.DenseSequence(line), N=10)
    assert mv.value == pytest.approx(0.5 * (1.0 - 2.0 ** -10))
    assert mv.tail_bound == pytest.approx(2.0 ** -10)
    assert mv.budget_used == 10


def test_map_metric_dispatch(zero_and_one, line, log_gauge):
    f, g = zero_and_one
    series = nonexp_lab.MapMetric.series([0.0], log_gauge, N=30, budget=64)
    assert series.describe() == {"kind": "series", "theta": [0.0], "gauge": "LogGauge", "N": 30}
    assert series.distance(f, g).value == pytest.approx(0.5 * (1.0 - 2.0 ** -30))
    weighted = nonexp_lab.MapMetric.weighted([0.0], 2, budget=100)
    assert weighted.distance(f, g).value == pytest.approx(1.0)
    pointwise = nonexp_lab.MapMetric.pointwise(nonexp_lab.DenseSequence(line), N=12)
    assert pointwise.describe()["kind"] == "pointwise"
    assert pointwise.distance(f, g).value == pytest.approx(0.5 * (1.0 - 2.0 ** -12))


def test_map_metric_unknown_kind():
    with pytest.raises(E.GaugeError) as exc:
        nonexp_lab.MapMetric("uniform")
    assert exc.value.code == "3004"


def test_d_n_theta(half_contraction, line):
    ident = nonexp_lab.identity(line)
    mv = nonexp_lab.d_n_theta(ident, half_contraction, 3, [0.0], budget=64, seed=0)
    assert mv.value == pytest.approx(2.5)


# ---------------------------------------------------------------------------
# 4) Local versus global
# ---------------------------------------------------------------------------

def test_local_from_global(log_gauge):
    assert nonexp_lab.local_from_global(0.1, 1, log_gauge) == pytest.approx(0.4)
    assert nonexp_lab.local_from_global(0.3, 1, log_gauge) is None
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.local_from_global(0.1, 0, log_gauge)
    assert exc.value.code == "1204"


def test_local_within(log_gauge):
    assert MM.local_within(0.1, 1, log_gauge, 0.5)
    assert not MM.local_within(0.2, 1, log_gauge, 0.5)
    with pytest.raises(E.WitnessError) as exc:
        MM.local_within(0.1, 1, log_gauge, 1.5)
    assert exc.value.code == "4000"


def test_local_within_doubled(log_gauge):
    assert MM.local_within_doubled(0.001, 1, log_gauge, 0.5) is None
    assert MM.local_within_doubled(0.007, 3, log_gauge, 0.5)
    assert not MM.local_within_doubled(0.01, 3, log_gauge, 0.5)


def test_local_from_global_weighted():
    assert nonexp_lab.local_from_global_weighted(0.1, 2.0, 2.0) == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# 5) Equivalence checks
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["weighted", "series"])
def test_basepoint_equivalence(kind, line, half_contraction, log_gauge):
    pairs = [(nonexp_lab.identity(line), half_contraction)]
    checks = nonexp_lab.basepoint_equivalence_check(kind, [0.0], [1.0], pairs, budget=128,
                                                    seed=0, gauge=log_gauge, N=20)
    assert len(checks) == 2
    assert nonexp_lab.all_passed(checks)


def test_basepoint_equivalence_equal_basepoints(line, half_contraction):
    pairs = [(nonexp_lab.identity(line), half_contraction)]
    checks = nonexp_lab.basepoint_equivalence_check("weighted", [2.0], [2.0], pairs, budget=64)
    assert checks[-1].name == "pair0:equal_basepoints"
    assert nonexp_lab.all_passed(checks)


def test_basepoint_equivalence_needs_pairs():
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.basepoint_equivalence_check("weighted", [0.0], [1.0], [])
    assert exc.value.code == "1202"


def test_bounded_equivalence(line, half_contraction, log_gauge):
    checks = nonexp_lab.bounded_equivalence_check(nonexp_lab.identity(line), half_contraction,
                                                  [0.0], log_gauge, 4.0, budget=128, seed=0)
    assert [c.name for c in checks] == ["displacement_within_diameter", "lower_chain",
                                        "upper_chain"]
    assert nonexp_lab.all_passed(checks)


# ---------------------------------------------------------------------------
# 6) Divergence demonstration
# ---------------------------------------------------------------------------

def test_divergence_demo():
    report = nonexp_lab.d_theta1_divergence_demo(4, budget=200, seed=0)
    assert [row.n for row in report.rows] == [3, 4]
    assert report.rows[0].expected == pytest.approx(3.0 / 7.0)
    assert report.rows[0].inner_sup == pytest.approx(0.0, abs=1e-9)
    assert report.rows[1].peak_distance == pytest.approx(4.0)
    assert report.passed


def test_divergence_map_is_nonexpansive(line):
    f, x_n = MM.divergence_map(line, line.origin(), 5)
    assert f.claimed_lip == pytest.approx(1.0)
    assert x_n[0] == pytest.approx(10.0)
    assert f([0.0])[0] == 0.0
    assert f(x_n)[0] == pytest.approx(5.0)


def test_divergence_demo_needs_three():
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.d_theta1_divergence_demo(2)
    assert exc.value.code == "1203"
