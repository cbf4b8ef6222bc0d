import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from fatou_foliations.charts import AffinePoint2, ChartId, ReferenceMetricId, chart_jacobian, chart_transition
from fatou_foliations.errors import ChartUndefined, EmptyRegion, FormSingular, InvalidForm
from fatou_foliations.foliation import Ambient, LinearFoliation, tangent_field
from fatou_foliations.forms import (
    ConstantForm, Eta, EtaPrime, Gamma, MeromorphicClosed, Nu, OmegaPrime, SwappedForm, dual_norm_sq, eval_form,
    gamma_chart_norm, gamma_constraint_check, invariance_defect, lower_bound_estimate, metric_norm_sq,
    transverse_ratio,
)
from fatou_foliations.holonomy import Axis, BaseCoord, axis_loop, circle_loop, holonomy_transport
from fatou_foliations.regions import RegionKind, RegionSpec
from fatou_foliations.verifier import invariance_evidence

coord = st.complex_numbers(min_magnitude=0.05, max_magnitude=10, allow_nan=False, allow_infinity=False)
vec = st.tuples(coord, coord)


def test_eval_form_examples():
    assert np.allclose(eval_form(Nu(-1), AffinePoint2(1, 1)), [-1, -1])
    assert np.allclose(eval_form(Eta(1), AffinePoint2(1, 1)), [0.5, -0.5])
    assert np.allclose(eval_form(EtaPrime(), AffinePoint2(1, 1e-3)), [1e-3, 1])
    with pytest.raises(FormSingular):
        eval_form(Nu(-1), AffinePoint2(0, 1))
    with pytest.raises(FormSingular):
        eval_form(Eta(1), AffinePoint2(0, 0))


def test_metric_norm_examples():
    assert metric_norm_sq(OmegaPrime(-1, 1), AffinePoint2(1, 1), [-1, 1]) == pytest.approx(0, abs=1e-15)
    assert metric_norm_sq(EtaPrime(), AffinePoint2(1, 1e-3), [1, 0]) == pytest.approx(1e-6, rel=1e-12)
    assert metric_norm_sq(Nu(-1), AffinePoint2(1, 1), [1, 0]) == pytest.approx(1.0)


def test_gamma_constraint_examples():
    assert gamma_constraint_check(0.5, 1, 1)
    assert gamma_constraint_check(0.5, 0, 3)
    assert not gamma_constraint_check(0.5, 2, 2)
    with pytest.raises(InvalidForm):
        Gamma(0.5, 2, 2)


def test_invalid_parameters():
    for bad in (lambda: Eta(-1), lambda: Nu(0.5), lambda: Eta(1 + 1j), lambda: OmegaPrime(0, 1),
                lambda: MeromorphicClosed("0", "x")):
        with pytest.raises(InvalidForm):
            bad()


def _forms_for(alpha):
    out = [OmegaPrime(alpha, 1.0)]
    if alpha.imag == 0 and alpha.real > 0:
        out.append(Eta(alpha.real))
    if alpha.imag == 0 and alpha.real < 0:
        out.append(Nu(alpha.real))
    if alpha.imag == 0 and 0 < alpha.real < 1:
        out.append(Gamma(alpha.real, 1.0, 1.0))
        out.append(Gamma(alpha.real, 0.0, (1 + alpha.real) / alpha.real))
    if alpha == -1:
        out.append(EtaPrime())
        out.append(MeromorphicClosed("-y", "-x"))
    return out


@pytest.mark.parametrize("alpha", [1j, 2 + 1j, 0.5 + 0j, 0.3 + 0j, -1 + 0j, -2.5 + 0j, 3 + 0j])
def test_forms_annihilate_leaves(alpha, rng):
    F = LinearFoliation.from_alpha(alpha)
    z = rng.normal(size=(2, 1000)) + 1j * rng.normal(size=(2, 1000))
    for phi in _forms_for(alpha):
        for x, y in z.T:
            q = AffinePoint2(x, y)
            c = eval_form(phi, q)
            X = tangent_field(F, q)
            assert abs(c @ X) <= 1e-10 * max(1.0, float(np.linalg.norm(c) * np.linalg.norm(X)))


@given(st.sampled_from([0.25, 0.5, 0.75]), coord, coord, vec, st.sampled_from([ChartId.AB, ChartId.UV]))
def test_gamma_chart_identity(alpha, x, y, v, chart):
    g = Gamma(alpha, 1.0, 1.0)
    q = AffinePoint2(x, y)
    try:
        q2 = chart_transition(q, chart)
    except ChartUndefined:
        return
    v = np.array(v)
    direct = math.sqrt(metric_norm_sq(g, q, v))
    closed = gamma_chart_norm(g, q2, chart_jacobian(q, chart) @ v)
    assert closed == pytest.approx(direct, rel=1e-9, abs=1e-12)


def test_nu_scaling_holonomy_is_invariant():
    F = LinearFoliation.from_alpha(-1.0)
    q = AffinePoint2(1.0, 0.7 - 0.2j)
    germ = holonomy_transport(F, q, axis_loop(Axis.SECOND))
    assert abs(abs(germ.derivative) - 1) < 1e-9
    assert invariance_defect(Nu(-1), germ, q, [0.3, 1.0]) < 1e-9


def test_omega_prime_invariant_under_hyperbolic_holonomy():
    F = LinearFoliation.from_alpha(1j)
    q = AffinePoint2(1.0, 0.5)
    germ = holonomy_transport(F, q, circle_loop(1.0, BaseCoord.FIRST), 1e-10)
    assert invariance_defect(OmegaPrime(1j, 1), germ, q, [0, 1]) < 1e-6 * metric_norm_sq(
        OmegaPrime(1j, 1), q, [0, 1])


def test_dx_is_not_invariant():
    # the loop in y around {y = 0} has multiplier e^{-2 pi} acting on the x fiber
    F = LinearFoliation.from_alpha(1j)
    q = AffinePoint2(1.0, 1.0)
    germ = holonomy_transport(F, q, circle_loop(1.0, BaseCoord.SECOND), 1e-10)
    d = invariance_defect(ConstantForm(1, 0), germ, q, [1, 0])
    assert d == pytest.approx(1 - math.exp(-4 * math.pi), rel=1e-6)


@pytest.mark.parametrize("alpha,phi,amb,kind", [
    (1j, OmegaPrime(1j, 1), Ambient.AFFINE2, RegionKind.COMPLEMENT_OF_AXES),
    (0.5, Eta(0.5), Ambient.AFFINE2, RegionKind.COMPLEMENT_OF_ORIGIN),
    (-1.0, Nu(-1.0), Ambient.AFFINE2, RegionKind.COMPLEMENT_OF_AXES),
    (0.5, Gamma(0.5, 1, 1), Ambient.PROJECTIVE2, RegionKind.COMPLEMENT_OF_TWO_LINES),
    (-1.0, EtaPrime(), Ambient.AFFINE2, RegionKind.HALF_SPACE_Y_NONZERO),
])
def test_invariance_pairs(alpha, phi, amb, kind):
    ev = invariance_evidence(LinearFoliation.from_alpha(alpha, amb), RegionSpec(amb, kind), phi, 50, 1e-6,
                             hol_tol=1e-9)
    assert ev["n_transports"] == 50 and ev["passed"], ev


@given(coord, coord, st.complex_numbers(min_magnitude=0.2, max_magnitude=5, allow_nan=False,
                                        allow_infinity=False))
def test_predicates_scale_invariant(x, y, c):
    # rescaling (lam, mu) leaves omega' up to the factor 1/c
    a = OmegaPrime(1j, 1.0)
    b = OmegaPrime(1j * c, c)
    q = AffinePoint2(x, y)
    assert np.allclose(eval_form(b, q) * c, eval_form(a, q), rtol=1e-10)


@given(coord, coord, st.sampled_from(list(ReferenceMetricId)))
def test_dual_norm_equals_transverse_ratio(x, y, metric):
    F = LinearFoliation.from_alpha(2 + 1j)
    q = AffinePoint2(x, y)
    phi = OmegaPrime(2 + 1j, 1.0)
    r1 = transverse_ratio(phi, q, metric, tangent_field(F, q))
    r2 = float(dual_norm_sq(phi, np.array([x]), np.array([y]), metric)[0])
    assert r1 == pytest.approx(r2, rel=1e-8)


def test_lower_bound_examples():
    U = RegionSpec(Ambient.PROJECTIVE2, RegionKind.COMPLEMENT_OF_COORD_TRIANGLE)
    a = lower_bound_estimate(OmegaPrime(1j, 1), U, ReferenceMetricId.FUBINI_STUDY, 2000)
    b = lower_bound_estimate(OmegaPrime(1j, 1), U.with_reach(1e-4), ReferenceMetricId.FUBINI_STUDY, 8000)
    assert a.value > 0 and abs(b.value - a.value) < 0.1 * a.value
    G = RegionSpec(Ambient.PROJECTIVE2, RegionKind.COMPLEMENT_OF_TWO_LINES)
    assert lower_bound_estimate(Gamma(0.5, 1, 1), G, ReferenceMetricId.FUBINI_STUDY, 2000).value > 0


def test_lower_bound_is_monotone_in_samples():
    U = RegionSpec(Ambient.AFFINE2, RegionKind.HALF_SPACE_Y_NONZERO)
    vals = [lower_bound_estimate(EtaPrime(), U, ReferenceMetricId.EUCLIDEAN2, n).value for n in (100, 400, 1600)]
    assert vals[0] >= vals[1] >= vals[2]


def test_eta_prime_decays_with_reach():
    U = RegionSpec(Ambient.AFFINE2, RegionKind.HALF_SPACE_Y_NONZERO)
    v = [lower_bound_estimate(EtaPrime(), U.with_reach(r), ReferenceMetricId.EUCLIDEAN2, 2000).value
         for r in (1e-1, 1e-2, 1e-3, 1e-4)]
    for a, b in zip(v, v[1:]):
        assert b <= a / 10


def test_empty_region():
    U = RegionSpec(Ambient.AFFINE2, RegionKind.CUSTOM, predicate=lambda x, y: np.zeros(np.shape(x), bool))
    with pytest.raises(EmptyRegion):
        lower_bound_estimate(EtaPrime(), U, ReferenceMetricId.EUCLIDEAN2, 10)


def test_swapped_form_pulls_back():
    g = Gamma(0.5, 1, 1)
    s = SwappedForm(g)
    assert np.allclose(eval_form(s, AffinePoint2(2, 3)), eval_form(g, AffinePoint2(3, 2))[::-1])
    # it annihilates the swapped foliation F_{1/alpha} = F_2
    F2 = LinearFoliation.from_alpha(2.0)
    q = AffinePoint2(0.7 + 0.1j, -1.2j)
    assert abs(eval_form(s, q) @ tangent_field(F2, q)) < 1e-12
