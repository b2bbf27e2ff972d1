"""
Tests for the porosity witnesses and their verification.

Coverage areas
--------------
- Witness constants for each kind (series and weighted metrics)
- Admissible radii and error codes
- Member generation and certified distances
- verify_witness reports, including degenerate radii
"""

import math

import pytest

import nonexp_lab
from nonexp_lab.metrics.dense import DenseSequence
from nonexp_lab.perturbations import members, witnesses
from nonexp_lab.utility import error as E


@pytest.fixture
def series(log_gauge):
    return nonexp_lab.MapMetric.series([0.0], log_gauge)


@pytest.fixture
def weighted():
    return nonexp_lab.MapMetric.weighted([0.0], 2)


@pytest.fixture
def shrunk_identity(line):
    """``x -> 3x/4``."""
    return nonexp_lab.contract_toward(nonexp_lab.identity(line), [0.0], 0.25)


# ---------------------------------------------------------------------------
# 1) Ball invariance
# ---------------------------------------------------------------------------

def test_ball_invariance_series_constants(translation, series):
    w = nonexp_lab.ball_invariance_witness(translation, 0.5, [0.0], series)
    assert w.kind == "ball_invariance"
    assert w.params["gamma"] == pytest.approx(1.0 / 12.0)
    assert w.params["M_f"] == pytest.approx(24.0)
    assert w.params["relaxed"]
    assert w.params["radius_used"] == "c5"
    assert w.radius == pytest.approx(2.0 ** -146, rel=1e-9)
    assert w.radius_log2 == pytest.approx(-146.0)
    assert not w.degenerate
    assert w.center_g([24.0])[0] == pytest.approx(23.0)


def test_ball_invariance_series_members_pass(translation, series):
    w = nonexp_lab.ball_invariance_witness(translation, 0.5, [0.0], series)
    report = nonexp_lab.verify_witness(w, member_count=100, seed=1, budget=64)
    assert report.passed
    assert report.passed_count == 100
    assert report.worst_margin > 0.0


def test_ball_invariance_weighted_constants(translation, weighted):
    w = nonexp_lab.ball_invariance_witness(translation, 0.5, [0.0], weighted)
    assert w.params["gamma"] == pytest.approx(1.0 / 6.0)
    assert w.params["M_f"] == pytest.approx(12.0)
    assert w.radius == pytest.approx(1.0 / 1296.0)
    assert w.radius_log2 == pytest.approx(2.0 * math.log2(1.0 / 36.0))


def test_ball_invariance_weighted_members_pass(translation, weighted):
    w = nonexp_lab.ball_invariance_witness(translation, 0.5, [0.0], weighted)
    report = nonexp_lab.verify_witness(w, member_count=100, seed=2, budget=64)
    assert report.passed
    assert report.failed_count == 0
    names = {c.name for c in report.checks}
    assert names == {"center_in_base_ball", "member_in_ball", "ball_invariance"}


def test_ball_invariance_rejects_large_radius(translation, series):
    with pytest.raises(E.WitnessError) as exc:
        nonexp_lab.ball_invariance_witness(translation, 1.0, [0.0], series)
    assert exc.value.code == "4000"


def test_witness_needs_nonexpansive_base(line, series):
    steep = nonexp_lab.cone_map(line, [0.0], 1.0, [0.0], [3.0])
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.ball_invariance_witness(steep, 0.25, [0.0], series)
    assert exc.value.code == "4002"


def test_ball_invariance_refuses_pointwise_metric(translation, line):
    metric = nonexp_lab.MapMetric.pointwise(DenseSequence(line))
    with pytest.raises(E.WitnessError) as exc:
        nonexp_lab.ball_invariance_witness(translation, 0.25, [0.0], metric)
    assert exc.value.code == "4004"


def test_witness_describe(translation, series):
    w = nonexp_lab.ball_invariance_witness(translation, 0.5, [0.0], series)
    info = w.describe()
    assert info["kind"] == "ball_invariance"
    assert info["predicate"] == "ball_invariance"
    assert info["M"] == pytest.approx(24.0)
    assert info["metric"]["gauge"] == "LogGauge"


# ---------------------------------------------------------------------------
# 2) Rakotch and modulus of continuity
# ---------------------------------------------------------------------------

def test_rakotch_constants(translation, series):
    w = nonexp_lab.rakotch_witness(translation, 0.5, 2, [0.0], series)
    assert w.params["gamma"] == pytest.approx(0.1875)
    assert w.params["bound"] == pytest.approx(0.9375)
    assert w.radius == pytest.approx(1.0 / 256.0)
    assert w.center_g.claimed_lip == pytest.approx(0.8125)


def test_rakotch_members_pass(translation, series):
    w = nonexp_lab.rakotch_witness(translation, 0.5, 2, [0.0], series)
    report = nonexp_lab.verify_witness(w, member_count=100, seed=3, budget=64)
    assert report.passed
    assert report.center_check.passed


def test_modcont_radius_underflows(translation, series):
    w = nonexp_lab.modcont_witness(translation, 0.5, 1.0, 0.5, [0.0], series)
    assert w.degenerate
    assert w.radius == 0.0
    assert w.radius_log2 == pytest.approx(-1152.0)
    assert w.params["N"] == 16
    assert w.params["gamma"] == pytest.approx(1.0 / 16.0)
    x0, y0 = w.params["x0"], w.params["y0"]
    assert x0[0] == pytest.approx(32.0)
    assert y0[0] == pytest.approx(31.0)
    gap = abs(w.center_g(x0)[0] - w.center_g(y0)[0])
    assert gap == pytest.approx(0.875)


def test_modcont_degenerate_members_are_the_center(translation, series):
    w = nonexp_lab.modcont_witness(translation, 0.5, 1.0, 0.5, [0.0], series)
    report = nonexp_lab.verify_witness(w, member_count=4, seed=0, budget=200)
    assert [m.kind for m in report.members] == ["center", "degenerate", "degenerate",
                                                "degenerate"]
    assert report.passed


def test_modcont_weighted_constants(translation, weighted):
    w = nonexp_lab.modcont_witness(translation, 0.5, 1.0, 0.5, [0.0], weighted)
    assert not w.degenerate
    assert w.params["eps"] == pytest.approx(0.0625)
    assert w.params["gamma"] == pytest.approx(0.25)
    assert w.params["alpha"] == pytest.approx(0.05)
    assert w.params["R"] == pytest.approx(4.0)
    assert w.radius == pytest.approx(6.25e-4)
    x0, y0 = w.params["x0"], w.params["y0"]
    assert abs(x0[0] - y0[0]) == pytest.approx(1.0)
    assert abs(w.center_g(x0)[0] - w.center_g(y0)[0]) > 0.75


def test_modcont_weighted_members_exceed_modulus(translation, weighted):
    w = nonexp_lab.modcont_witness(translation, 0.5, 1.0, 0.5, [0.0], weighted)
    report = nonexp_lab.verify_witness(w, member_count=100, seed=0, budget=64)
    kinds = {m.kind for m in report.members}
    assert {"contract", "convex_constant"} <= kinds
    assert "degenerate" not in kinds
    assert all(m.predicate.name == "modulus_exceeds" for m in report.members)
    assert all(m.predicate.measured > 0.5 for m in report.members)
    assert report.passed
    assert report.passed_count == 100


def test_modcont_mu_range(translation, series):
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.modcont_witness(translation, 0.5, 1.0, 1.0, [0.0], series)
    assert exc.value.code == "1302"


# ---------------------------------------------------------------------------
# 3) Shrink
# ---------------------------------------------------------------------------

def test_shrink_constants(half_contraction, line):
    seq = DenseSequence(line)
    w = nonexp_lab.shrink_witness(half_contraction, [0.0], [1.0], seq)
    assert w.params["gamma"] == pytest.approx(0.1)
    assert w.params["L"] == pytest.approx(0.45)
    assert w.params["r_pair"] == pytest.approx(0.055)
    assert (w.params["m1"], w.params["m2"]) == (1, 3)
    assert w.radius == pytest.approx(0.055 / 1.055 / 8.0)


def test_shrink_members_pass(half_contraction, line):
    w = nonexp_lab.shrink_witness(half_contraction, [0.0], [1.0], DenseSequence(line))
    report = nonexp_lab.verify_witness(w, member_count=100, seed=4, budget=64)
    assert report.passed


def test_shrink_needs_distinct_points(half_contraction, line):
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.shrink_witness(half_contraction, [1.0], [1.0], DenseSequence(line))
    assert exc.value.code == "1308"


def test_shrink_needs_pointwise_metric(half_contraction, line, weighted):
    with pytest.raises(E.WitnessError) as exc:
        nonexp_lab.shrink_witness(half_contraction, [0.0], [1.0], DenseSequence(line),
                                  metric=weighted)
    assert exc.value.code == "4004"


# ---------------------------------------------------------------------------
# 4) Local Lipschitz
# ---------------------------------------------------------------------------

def test_local_lipschitz_witness(shrunk_identity, weighted):
    w = nonexp_lab.local_lipschitz_witness(shrunk_identity, 0.5, 2, 0.5, [[0.0], [0.75]], 0.5,
                                           [0.0], weighted)
    assert w.params["net_points"] == 2
    assert w.params["partner_distance"] == pytest.approx(1.0 / 256.0)
    assert w.radius == pytest.approx(1.0 / 10240.0)
    assert w.center_g.claimed_lip == 1.0
    report = nonexp_lab.verify_witness(w, member_count=100, seed=5, budget=64)
    assert report.passed
    assert report.members[0].predicate.measured == pytest.approx(1.0, abs=1e-6)


def test_local_lipschitz_needs_net_points_in_ball(shrunk_identity, weighted):
    with pytest.raises(E.WitnessError) as exc:
        nonexp_lab.local_lipschitz_witness(shrunk_identity, 0.5, 2, 0.5, [[0.0], [5.0]], 0.5,
                                           [0.0], weighted)
    assert exc.value.code == "4005"


# ---------------------------------------------------------------------------
# 5) Dispatch, members, verification
# ---------------------------------------------------------------------------

def test_build_witness_dispatch(translation, series):
    w = nonexp_lab.build_witness("rakotch", f=translation, r=0.5, n=2, theta=[0.0],
                                 metric=series)
    assert w.kind == "rakotch"
    assert w.params["bound"] == pytest.approx(0.9375)


def test_build_witness_unknown_kind():
    with pytest.raises(E.WitnessError) as exc:
        nonexp_lab.build_witness("porous")
    assert exc.value.code == "4003"


def test_verify_witness_needs_members(translation, weighted):
    w = nonexp_lab.ball_invariance_witness(translation, 0.5, [0.0], weighted)
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.verify_witness(w, member_count=0)
    assert exc.value.code == "1309"


def test_member_kinds_cycle(translation, weighted):
    w = nonexp_lab.ball_invariance_witness(translation, 0.5, [0.0], weighted)
    got = [members.generate_member(w, i, seed=i) for i in range(4)]
    assert [m.kind for m in got] == ["center", "contract", "far_collapse", "convex_constant"]
    assert got[0].h is w.center_g
    for m in got[1:]:
        assert 0.0 < m.certified <= w.radius
        assert m.parameter > 0.0


def test_far_collapse_falls_back_without_contraction(shrunk_identity, weighted):
    w = nonexp_lab.local_lipschitz_witness(shrunk_identity, 0.5, 2, 0.5, [[0.0], [0.75]], 0.5,
                                           [0.0], weighted)
    assert members.generate_member(w, 2, seed=0).kind == "contract"


def test_certify_center(translation, series):
    w = nonexp_lab.ball_invariance_witness(translation, 0.5, [0.0], series)
    check = witnesses.certify_center(w, seed=0)
    assert check.name == "center_in_base_ball"
    assert check.passed
    assert check.measured >= 1.0 / 6.0
