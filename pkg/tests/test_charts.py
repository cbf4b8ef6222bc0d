import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fatou_foliations.charts import (
    AffinePoint2, ChartId, ProjectivePoint, ReferenceMetricId, best_chart, chart_jacobian, chart_transition,
    fubini_study_matrix, homogeneous, random_projective, reference_norm_sq, to_affine, to_projective,
)
from fatou_foliations.errors import ChartUndefined

coord = st.complex_numbers(min_magnitude=0.05, max_magnitude=20, allow_nan=False, allow_infinity=False)
charts = st.sampled_from(list(ChartId))


def test_to_affine_examples():
    q = to_affine(ProjectivePoint(1, 2, 4), ChartId.XY)
    assert abs(q.c1 - 0.25) < 1e-15 and abs(q.c2 - 0.5) < 1e-15
    q = to_affine(ProjectivePoint(1, 2, 4), ChartId.AB)
    assert abs(q.c1 - 0.5) < 1e-15 and abs(q.c2 - 2.0) < 1e-15
    with pytest.raises(ChartUndefined):
        to_affine(ProjectivePoint(1, 0, 0), ChartId.XY)


def test_projective_equality_ignores_scale_and_phase():
    assert ProjectivePoint(1, 2, 3) == ProjectivePoint(2j, 4j, 6j)
    assert ProjectivePoint(1, 2, 3) != ProjectivePoint(1, 2, 3.1)
    with pytest.raises(ValueError):
        ProjectivePoint(0, 0, 0)
    with pytest.raises(ValueError):
        AffinePoint2(float("nan"), 0)


def test_transition_xy_to_uv():
    # (x, y) = (2, 3) is [2:3:1], which is (3/2, 1/2) in the UV chart
    q = chart_transition(AffinePoint2(2, 3), ChartId.UV)
    assert abs(q.c1 - 1.5) < 1e-15 and abs(q.c2 - 0.5) < 1e-15
    with pytest.raises(ChartUndefined):
        chart_transition(AffinePoint2(0, 3), ChartId.UV)


@given(coord, coord, charts, charts)
def test_transition_round_trip(a, b, src, dst):
    q = AffinePoint2(a, b, src)
    try:
        r = chart_transition(chart_transition(q, dst), src)
    except ChartUndefined:
        return
    assert abs(r.c1 - a) <= 1e-10 * max(1, abs(a)) and abs(r.c2 - b) <= 1e-10 * max(1, abs(b))


@given(coord, coord, charts, charts)
def test_jacobian_matches_finite_differences(a, b, src, dst):
    q = AffinePoint2(a, b, src)
    try:
        J = chart_jacobian(q, dst)
        chart_transition(q, dst)
    except ChartUndefined:
        return
    h = 1e-6 * max(1.0, abs(a), abs(b))
    fd = np.empty((2, 2), dtype=complex)
    for m in range(2):
        e = [0, 0]
        e[m] = h
        p = chart_transition(AffinePoint2(a + e[0], b + e[1], src), dst).coords
        n = chart_transition(AffinePoint2(a - e[0], b - e[1], src), dst).coords
        fd[:, m] = (p - n) / (2 * h)
    assert np.allclose(J, fd, rtol=1e-5, atol=1e-7 * float(np.max(np.abs(J))))


@given(coord, coord, charts)
def test_projective_round_trip(a, b, c):
    q = AffinePoint2(a, b, c)
    r = to_affine(to_projective(q), c)
    assert abs(r.c1 - a) < 1e-10 * max(1, abs(a)) and abs(r.c2 - b) < 1e-10 * max(1, abs(b))
    _, d = {ChartId.XY: (0, 2), ChartId.AB: (0, 1), ChartId.UV: (0, 0)}[c]
    assert homogeneous(q)[d] == 1


def test_fubini_study_at_origin_is_identity():
    assert np.allclose(fubini_study_matrix([0, 0]), np.eye(2))
    assert reference_norm_sq(ReferenceMetricId.FUBINI_STUDY, AffinePoint2(0, 0), [1, 0]) == pytest.approx(1.0)
    # at (1, 0): g(e1, e1) = (2 - 1)/4
    assert reference_norm_sq(ReferenceMetricId.FUBINI_STUDY, AffinePoint2(1, 0), [1, 0]) == pytest.approx(0.25)
    assert reference_norm_sq(ReferenceMetricId.EUCLIDEAN2, AffinePoint2(5, 5), [3, 4j]) == pytest.approx(25.0)


@given(coord, coord, charts, charts, st.tuples(coord, coord))
def test_fubini_study_is_chart_independent(a, b, src, dst, v):
    q = AffinePoint2(a, b, src)
    try:
        q2 = chart_transition(q, dst)
        J = chart_jacobian(q, dst)
    except ChartUndefined:
        return
    v = np.array(v)
    g1 = reference_norm_sq(ReferenceMetricId.FUBINI_STUDY, q, v)
    g2 = reference_norm_sq(ReferenceMetricId.FUBINI_STUDY, q2, J @ v)
    assert g2 == pytest.approx(g1, rel=1e-8)


def test_fubini_study_unitary_invariance(rng):
    # U(3) acts by isometries; rotate by a coordinate phase and check a chart metric value
    z = random_projective(rng, 20)
    assert np.allclose(np.linalg.norm(z, axis=1), 1.0)
    for row in z:
        p = ProjectivePoint(*row)
        ph = cmath.exp(0.7j)
        p2 = ProjectivePoint(row[0] * ph, row[1], row[2])
        c = best_chart(p)
        q, q2 = to_affine(p, ChartId.XY), to_affine(p2, ChartId.XY)
        v = np.array([1.0, 0.5])
        g1 = reference_norm_sq(ReferenceMetricId.FUBINI_STUDY, q, v)
        g2 = reference_norm_sq(ReferenceMetricId.FUBINI_STUDY, q2, np.array([ph, 1.0]) * v)
        assert g2 == pytest.approx(g1, rel=1e-10)
        assert abs(p.coords[{ChartId.XY: 2, ChartId.AB: 1, ChartId.UV: 0}[c]]) == pytest.approx(
            float(np.max(np.abs(p.coords))))
        assert math.isfinite(g1)
