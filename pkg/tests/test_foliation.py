import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from fatou_foliations.charts import AffinePoint2, ChartId, ProjectivePoint, chart_jacobian, chart_transition
from fatou_foliations.errors import ChartUndefined, DegenerateChartModel, InvalidFoliation, NotSingular
from fatou_foliations.foliation import (
    Ambient, LinearFoliation, SingularityType, chart_model, classify_singularity, defining_form, local_ratio,
    is_transversal_to_infinity, siegel_points, singular_set, tangent_field,
)

P2 = Ambient.PROJECTIVE2
coef = st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False)
coord = st.complex_numbers(min_magnitude=0.05, max_magnitude=10, allow_nan=False, allow_infinity=False)


def test_alpha_examples():
    assert LinearFoliation(1j, 1).alpha == 1j
    assert LinearFoliation(2, 4).alpha == 0.5
    assert LinearFoliation(-3, 3).alpha == -1
    with pytest.raises(InvalidFoliation):
        LinearFoliation(0, 1)


def test_tangent_field_examples():
    F = LinearFoliation.from_alpha(1j)
    assert np.allclose(tangent_field(F, AffinePoint2(1, 1)), [1j, 1])
    assert np.allclose(tangent_field(F, AffinePoint2(0, 0)), [0, 0])
    with pytest.raises(ChartUndefined):
        tangent_field(F, AffinePoint2(1, 1, ChartId.AB))


@given(coef, coef, coord, coord)
def test_form_kills_tangent(lam, mu, x, y):
    F = LinearFoliation(lam, mu)
    q = AffinePoint2(x, y)
    assert abs(defining_form(F, q) @ tangent_field(F, q)) < 1e-12 * max(1, abs(lam * mu * x * y))
    # the form is mu y dx - lam x dy
    assert np.allclose(defining_form(F, q), [mu * y, -lam * x])


def _oracle_model_alpha(G, chart, q_xy):
    """Ratio of the XY field pushed to ``chart``, divided by the chart coordinates."""
    q = chart_transition(q_xy, chart)
    v = chart_jacobian(q_xy, chart) @ tangent_field(LinearFoliation(G.lam, G.mu), q_xy)
    return (v[0] / q.c1) / (v[1] / q.c2)


@given(coef, coord, coord, st.sampled_from([ChartId.AB, ChartId.UV]))
def test_chart_model_matches_pushed_field(alpha, x, y, chart):
    assume(abs(alpha - 1) > 1e-3)
    G = LinearFoliation.from_alpha(alpha, P2)
    model = chart_model(G, chart)
    assert model.ambient is Ambient.AFFINE2
    assert abs(model.alpha - _oracle_model_alpha(G, chart, AffinePoint2(x, y))) < 1e-9 * max(1, abs(model.alpha))


def test_chart_model_values():
    G = LinearFoliation.from_alpha(0.5, P2)
    assert chart_model(G, ChartId.XY).alpha == 0.5
    assert chart_model(G, ChartId.AB).alpha == pytest.approx(0.5)
    assert chart_model(G, ChartId.UV).alpha == pytest.approx(-1.0)
    assert chart_model(LinearFoliation.from_alpha(1j, P2), ChartId.XY).alpha == 1j
    with pytest.raises(DegenerateChartModel):
        chart_model(LinearFoliation.from_alpha(1.0, P2), ChartId.AB)


@given(coef)
def test_local_ratios_and_index_sums(alpha):
    assume(abs(alpha - 1) > 1e-3)
    G = LinearFoliation.from_alpha(alpha, P2)
    s = {tuple(np.round(np.abs(p.coords))): p for p in singular_set(G)}
    r0 = local_ratio(G, s[(0, 0, 1)])
    r1 = local_ratio(G, s[(0, 1, 0)])
    r2 = local_ratio(G, s[(1, 0, 0)])
    assert r0 == pytest.approx(alpha)
    # Camacho-Sad: the indices along an invariant line of CP^2 add up to its self-intersection 1
    assert 1 / r1 + 1 / r2 == pytest.approx(1.0, abs=1e-9 * max(1, abs(1 / r1)))  # line z2 = 0
    assert r0 + r1 == pytest.approx(1.0, abs=1e-9 * max(1, abs(r0)))  # line z0 = 0


def test_singular_sets():
    assert singular_set(LinearFoliation.from_alpha(1j)) == [AffinePoint2(0, 0)]
    s = singular_set(LinearFoliation.from_alpha(1j, P2))
    assert len(s) == 3 and ProjectivePoint(1, 0, 0) in s and ProjectivePoint(0, 1, 0) in s
    G1 = LinearFoliation.from_alpha(1.0, P2)
    assert singular_set(G1) == [ProjectivePoint(0, 0, 1)]
    assert is_transversal_to_infinity(G1)
    assert not is_transversal_to_infinity(LinearFoliation.from_alpha(2.0, P2))


def test_classification_examples():
    assert classify_singularity(LinearFoliation.from_alpha(1j), AffinePoint2(0, 0)) is SingularityType.POINCARE
    assert classify_singularity(LinearFoliation.from_alpha(-1), AffinePoint2(0, 0)) is SingularityType.SIEGEL
    G = LinearFoliation.from_alpha(0.5, P2)
    assert siegel_points(G) == [ProjectivePoint(1, 0, 0)]
    assert siegel_points(LinearFoliation.from_alpha(2.0, P2)) == [ProjectivePoint(0, 1, 0)]
    assert siegel_points(LinearFoliation.from_alpha(-1.0, P2)) == [ProjectivePoint(0, 0, 1)]
    assert siegel_points(LinearFoliation.from_alpha(1j, P2)) == []
    with pytest.raises(NotSingular):
        classify_singularity(G, ProjectivePoint(1, 1, 1))


@given(coef, st.complex_numbers(min_magnitude=0.1, max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_scale_invariance(alpha, c):
    assume(abs(alpha - 1) > 1e-3)
    G = LinearFoliation.from_alpha(alpha, P2)
    H = G.scaled(c)
    for p in singular_set(G):
        assert classify_singularity(G, p) is classify_singularity(H, p)
        assert local_ratio(H, p) == pytest.approx(local_ratio(G, p), rel=1e-10)
