"""
Tests for nonexpansive maps, their combinators and the Lipschitz estimators.

Coverage areas
--------------
- Leaves (identity, constant, affine) and claimed constants
- Combinators: contract_toward, convex_with_constant, compose, cone, piecewise
- Immutability and the intermediate tag
- Sampled Lipschitz constants, modulus of continuity, local constants
- Rakotch gauges and their step function
"""

import numpy as np
import pytest

import nonexp_lab
from nonexp_lab.geometry.spaces import HalfSpace, Hyperboloid2, L1Space
from nonexp_lab.mappings import nonexp_map as M
from nonexp_lab.utility import error as E


# ---------------------------------------------------------------------------
# 1) Leaves
# ---------------------------------------------------------------------------

def test_identity_and_constant(plane):
    f = nonexp_lab.identity(plane)
    assert f.claimed_lip == 1.0
    assert np.array_equal(f([1.0, 2.0]), [1.0, 2.0])
    c = nonexp_lab.constant(plane, [3.0, 4.0])
    assert c.claimed_lip == 0.0
    assert np.array_equal(c([-7.0, 0.5]), [3.0, 4.0])


def test_affine_scalar_matrix(translation):
    assert translation.claimed_lip == pytest.approx(1.0)
    assert translation([2.0])[0] == pytest.approx(3.0)


def test_affine_claims_spectral_norm(plane):
    f = nonexp_lab.affine(plane, [[0.0, 0.5], [0.5, 0.0]], 0.0)
    assert f.claimed_lip == pytest.approx(0.5)
    assert np.allclose(f([2.0, 4.0]), [2.0, 1.0])


def test_affine_claims_column_sum_on_l1():
    X = L1Space(2)
    f = nonexp_lab.affine(X, [[0.5, 0.1], [0.25, 0.2]], [0.0, 0.0])
    assert f.claimed_lip == pytest.approx(0.75)


def test_affine_rejects_expansive_matrix(line):
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.affine(line, 2.0, 0.0)
    assert exc.value.code == "1103"


def test_affine_shape_mismatch(plane):
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.affine(plane, np.eye(3), 0.0)
    assert exc.value.code == "1000"


def test_affine_not_supported_on_hyperboloid():
    with pytest.raises(E.GeometryError) as exc:
        nonexp_lab.affine(Hyperboloid2(), 1.0, 0.0)
    assert exc.value.code == "2002"


def test_affine_must_preserve_halfspace():
    X = HalfSpace(2)
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.affine(X, np.eye(2), [0.0, -1.0])
    assert exc.value.code == "1104"
    f = nonexp_lab.affine(X, [[0.5, 0.0], [0.0, 0.5]], [1.0, 0.0])
    assert f.claimed_lip <= 1.0 + 1e-12


def test_eval_checks_model_and_dimension(translation, plane):
    assert M.eval(translation, [1.0])[0] == pytest.approx(2.0)
    with pytest.raises(E.InputError) as exc:
        M.eval(translation, [1.0], plane)
    assert exc.value.code == "1100"
    with pytest.raises(E.InputError) as exc:
        M.eval(translation, [1.0, 2.0])
    assert exc.value.code == "1000"


# ---------------------------------------------------------------------------
# 2) Combinators
# ---------------------------------------------------------------------------

def test_contract_toward_worked_example(translation):
    """The contraction of x+1 toward 0 with weight 1/12 maps 24 to 23."""
    g = nonexp_lab.contract_toward(translation, [0.0], 1.0 / 12.0)
    assert g([24.0])[0] == pytest.approx(23.0)
    assert g.claimed_lip == pytest.approx(11.0 / 12.0)
    assert g([0.0])[0] == pytest.approx(translation([0.0])[0])


@pytest.mark.parametrize("gamma", [0.0, 1.0, -0.5])
def test_contract_toward_gamma_range(translation, gamma):
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.contract_toward(translation, [0.0], gamma)
    assert exc.value.code == "1101"


def test_convex_with_constant(translation):
    g = nonexp_lab.convex_with_constant(translation, [10.0], 0.5)
    assert g([0.0])[0] == pytest.approx(5.5)
    assert g.claimed_lip == pytest.approx(0.5)
    assert nonexp_lab.convex_with_constant(translation, [10.0], 1.0)([3.0])[0] == 10.0


def test_compose_multiplies_constants(line, half_contraction):
    h = nonexp_lab.compose(half_contraction, half_contraction)
    assert h.claimed_lip == pytest.approx(0.25)
    assert h([0.0])[0] == pytest.approx(1.5)


def test_compose_rejects_other_model(translation, plane):
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.compose(translation, nonexp_lab.identity(plane))
    assert exc.value.code == "1105"


def test_cone_map(line):
    f = nonexp_lab.cone_map(line, [0.0], 2.0, [5.0], [6.0])
    assert f.claimed_lip == pytest.approx(0.5)
    assert f([0.0])[0] == pytest.approx(6.0)
    assert f([1.0])[0] == pytest.approx(5.5)
    assert f([3.0])[0] == pytest.approx(5.0)


def test_steep_cone_is_intermediate(line):
    f = nonexp_lab.cone_map(line, [0.0], 1.0, [0.0], [3.0])
    assert f.intermediate
    assert f.claimed_lip == pytest.approx(3.0)
    with pytest.raises(E.InputError) as exc:
        M.require_nonexpansive(f)
    assert exc.value.code == "1103"


def test_piecewise_selects_pieces(line):
    left = nonexp_lab.constant(line, [0.0])
    right = nonexp_lab.identity(line)
    f = nonexp_lab.piecewise(line, lambda x: 0 if x[0] < 0 else 1, [left, right], 1.0,
                             labels=["zero", "id"])
    assert f([-3.0])[0] == 0.0
    assert f([2.0])[0] == 2.0
    assert "zero" in repr(f)


def test_map_is_immutable(translation):
    with pytest.raises(AttributeError):
        translation.claimed_lip = 0.5


def test_claim_just_above_one_snaps_to_one(line):
    f = M.NonexpMap(nonexp_lab.identity(line).root, 1.0 + 1e-13)
    assert f.claimed_lip == 1.0
    assert not f.intermediate


def test_claim_above_one_needs_intermediate_tag(line):
    root = nonexp_lab.identity(line).root
    with pytest.raises(E.InputError) as exc:
        M.NonexpMap(root, 1.5)
    assert exc.value.code == "1103"
    f = M.NonexpMap(root, 1.2, intermediate=True)
    assert f.intermediate
    assert f.within_slack


def test_negative_claim_rejected(line):
    with pytest.raises(E.InputError) as exc:
        M.NonexpMap(nonexp_lab.identity(line).root, -0.1)
    assert exc.value.code == "1103"


def test_provenance_repr(translation):
    g = nonexp_lab.contract_toward(translation, [0.0], 0.25)
    text = repr(g)
    assert "contract_toward" in text and "affine" in text
    kinds = [node.kind for node in g.provenance.walk()]
    assert kinds[0] == "contract_toward"


def test_evaluate_many(half_contraction):
    out = half_contraction.evaluate_many([[0.0], [2.0], [4.0]])
    assert np.allclose(out[:, 0], [1.0, 2.0, 3.0])


# ---------------------------------------------------------------------------
# 3) Estimators
# ---------------------------------------------------------------------------

def test_empirical_lipschitz_of_contraction(half_contraction):
    est = nonexp_lab.empirical_lipschitz(half_contraction, [0.0], 5.0, budget=200, seed=1)
    assert est.value == pytest.approx(0.5, abs=1e-9)
    assert est.pairs_tested > 0
    assert est.best_pair is not None


def test_empirical_lipschitz_never_exceeds_claim(plane):
    f = nonexp_lab.affine(plane, [[0.6, 0.0], [0.0, 0.3]], [1.0, 1.0])
    est = nonexp_lab.empirical_lipschitz(f, [0.0, 0.0], 3.0, budget=300, seed=2)
    assert est.value <= f.claimed_lip + 1e-9
    assert est.value > 0.3


def test_empirical_lipschitz_is_reproducible(half_contraction):
    a = nonexp_lab.empirical_lipschitz(half_contraction, [0.0], 5.0, budget=100, seed=9)
    b = nonexp_lab.empirical_lipschitz(half_contraction, [0.0], 5.0, budget=100, seed=9)
    assert a.value == b.value


def test_empirical_lipschitz_radius_must_be_positive(half_contraction):
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.empirical_lipschitz(half_contraction, [0.0], 0.0, budget=10)
    assert exc.value.code == "1003"


def test_empirical_lipschitz_budget_must_be_positive(half_contraction):
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.empirical_lipschitz(half_contraction, [0.0], 1.0, budget=0)
    assert exc.value.code == "1004"


def test_modulus_profile_is_nondecreasing(half_contraction):
    profile = nonexp_lab.modulus_profile(half_contraction, [2.0, 0.5, 1.0], budget=100, seed=3)
    values = [p.value for p in profile]
    assert values == pytest.approx([1.0, 0.25, 0.5], rel=1e-6)


def test_modulus_of_continuity(translation):
    est = nonexp_lab.modulus_of_continuity(translation, 1.0, budget=100, seed=0)
    assert est.value == pytest.approx(1.0, rel=1e-6)


def test_local_lipschitz(half_contraction):
    est = nonexp_lab.local_lipschitz(half_contraction, [3.0], 0.1, budget=100, seed=4)
    assert est.value == pytest.approx(0.5, abs=1e-9)


def test_rakotch_gauge_estimate(half_contraction):
    est = nonexp_lab.rakotch_gauge_estimate(half_contraction, [0.0], 3, budget=200, seed=5)
    assert est.value == pytest.approx(0.5, abs=1e-9)
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.rakotch_gauge_estimate(half_contraction, [0.0], 0, budget=10)
    assert exc.value.code == "1102"


def test_rakotch_gauges(half_contraction):
    gauge = nonexp_lab.rakotch_gauges(half_contraction, [0.0], 4, budget=200, seed=6)
    assert gauge.n_max == 4
    assert gauge.gauges == pytest.approx([0.5] * 4, abs=1e-6)
    assert gauge.all_below_one
    assert gauge.step(1.0) == gauge.gauges[-1]
    assert gauge.step(0.01) <= 1.0
    assert gauge.f is half_contraction


def test_rakotch_step_below_one_over_m_stays_in_the_ball(line):
    # flat on B(0, 2), a tent of slope 1/2 around x = 10
    f = nonexp_lab.cone_map(line, [10.0], 1.0, [0.0], [0.5])
    gauge = nonexp_lab.rakotch_gauges(f, [0.0], 2, budget=200, seed=0)
    unrestricted = nonexp_lab.rakotch_gauge_estimate(f, [0.0], 16, budget=500, seed=1)
    assert gauge.step(1.0 / 64.0) == 0.0
    assert unrestricted.value > 0.0
    assert gauge.step(1.0 / 64.0) <= unrestricted.value


def test_rakotch_gauges_are_nondecreasing(line):
    f = nonexp_lab.identity(line)
    gauge = nonexp_lab.rakotch_gauges(f, [0.0], 3, budget=100, seed=0)
    assert all(a <= b for a, b in zip(gauge.gauges, gauge.gauges[1:]))
    assert not gauge.all_below_one


def test_rakotch_gauges_reject_expansive_map(line):
    f = nonexp_lab.cone_map(line, [0.0], 1.0, [0.0], [3.0])
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.rakotch_gauges(f, [0.0], 2, budget=10)
    assert exc.value.code == "1103"


def test_rakotch_gauges_need_positive_index(half_contraction):
    with pytest.raises(E.InputError) as exc:
        nonexp_lab.rakotch_gauges(half_contraction, [0.0], 0, budget=10)
    assert exc.value.code == "1102"


def test_rakotch_step_rejects_negative_argument(half_contraction):
    gauge = nonexp_lab.rakotch_gauges(half_contraction, [0.0], 1, budget=50)
    with pytest.raises(E.InputError):
        gauge.step(-1.0)
