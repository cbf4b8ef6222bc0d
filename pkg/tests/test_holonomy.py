import cmath
import math
import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fatou_foliations.charts import AffinePoint2
from fatou_foliations.errors import HolonomyUndefined, PathThroughSingularity
from fatou_foliations.foliation import LinearFoliation
from fatou_foliations.holonomy import (
    Arc, Axis, BaseCoord, LeafPath, Line, axis_loop, axis_multiplier, circle_loop, closed_form_multiplier,
    holonomy_transport, integrate_leaf, is_hyperbolic, random_leaf_path, segment_path,
)

ALPHAS = [1j, 2 + 1j, 0.5, -1.0, 2.0]


def test_alpha_one_loop_is_trivial():
    r = integrate_leaf(LinearFoliation.from_alpha(1.0), circle_loop())
    assert abs(r.end_fiber - 1) < 1e-9


def test_alpha_i_loop_oracle():
    r = integrate_leaf(LinearFoliation.from_alpha(1j), axis_loop(Axis.FIRST), 1e-10)
    assert abs(r.multiplier) == pytest.approx(math.exp(-2 * math.pi), rel=1e-6)
    assert abs(r.multiplier) == pytest.approx(1.867442e-3, rel=1e-6)


def test_half_circle_for_alpha_two():
    path = LeafPath(BaseCoord.FIRST, [Arc(0j, 1.0, 0.0, math.pi)], 1.0)
    r = integrate_leaf(LinearFoliation.from_alpha(2.0), path)
    assert abs(r.end_fiber - cmath.exp(1j * math.pi / 2)) < 1e-8


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("axis", list(Axis))
def test_axis_loops_match_closed_form(alpha, axis):
    F = LinearFoliation.from_alpha(alpha)
    r = integrate_leaf(F, axis_loop(axis), 1e-9)
    m = axis_multiplier(F, axis)
    assert abs(r.multiplier - m) <= 1e-6 * abs(m)


def test_axis_multiplier_examples():
    assert axis_multiplier(LinearFoliation.from_alpha(1j), Axis.FIRST) == pytest.approx(math.exp(-2 * math.pi))
    assert axis_multiplier(LinearFoliation.from_alpha(-1), Axis.FIRST) == pytest.approx(1)
    assert axis_multiplier(LinearFoliation.from_alpha(-1), Axis.SECOND) == pytest.approx(1)
    assert axis_multiplier(LinearFoliation.from_alpha(0.5), Axis.FIRST) == pytest.approx(-1)
    # second axis for alpha = i: exp(2 pi i / i) = exp(2 pi)
    assert abs(axis_multiplier(LinearFoliation.from_alpha(1j), Axis.SECOND)) == pytest.approx(math.exp(2 * math.pi))


def test_is_hyperbolic_examples():
    assert is_hyperbolic(math.exp(-2 * math.pi), 1e-6)
    assert not is_hyperbolic(cmath.exp(2j * math.pi * 0.3), 1e-6)
    assert not is_hyperbolic(1.0, 0.05)
    with pytest.raises(ValueError):
        is_hyperbolic(1.0, 0.5)


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_hyperbolicity_criterion(re, im):
    a = complex(re, im)
    if abs(a) < 0.1:
        return
    F = LinearFoliation.from_alpha(a)
    tol = 1e-6
    # |e^{2 pi i alpha}| = e^{-2 pi Im alpha}
    hyp = is_hyperbolic(axis_multiplier(F, Axis.FIRST), tol)
    margin = abs(math.exp(-2 * math.pi * im) - 1)
    if abs(margin - tol) > 1e-9:
        assert hyp == (margin > tol)
    if im != 0:
        assert is_hyperbolic(axis_multiplier(F, Axis.FIRST), tol) or is_hyperbolic(axis_multiplier(F, Axis.SECOND),
                                                                                  tol) or abs(im) < 1e-6


def test_homotopic_loops_agree():
    F = LinearFoliation.from_alpha(2 + 1j)
    a = integrate_leaf(F, circle_loop(1.0), 1e-10).multiplier
    b = integrate_leaf(F, circle_loop(0.4, center=0.1 + 0.05j), 1e-10).multiplier
    square = LeafPath(BaseCoord.FIRST, [Line(1 - 1j, 1 + 1j), Line(1 + 1j, -1 + 1j), Line(-1 + 1j, -1 - 1j),
                                        Line(-1 - 1j, 1 - 1j)], 1.0)
    c = integrate_leaf(F, square, 1e-10).multiplier
    assert abs(a - b) < 1e-7 * abs(a) and abs(a - c) < 1e-7 * abs(a)


@given(st.integers(0, 10_000))
def test_random_paths_match_closed_form(seed):
    rng = np.random.default_rng(seed)
    F = LinearFoliation.from_alpha(complex(rng.uniform(-2, 2), rng.uniform(-1, 1)) or 1.0)
    path = random_leaf_path(rng, BaseCoord.FIRST, 1.0 + 0.5j)
    r = integrate_leaf(F, path, 1e-10)
    want = closed_form_multiplier(F, path)
    assert abs(r.multiplier - want) <= 1e-7 * abs(want)


def test_transport_properties():
    F = LinearFoliation.from_alpha(1j)
    q = AffinePoint2(1.0, 0.3)
    ident = holonomy_transport(F, q, segment_path(1.0, 1.0))
    assert ident.derivative == 1 and ident(q) == q
    p1 = segment_path(1.0, 2.0 + 1j)
    p2 = segment_path(2.0 + 1j, -0.5 + 2j)
    g1 = holonomy_transport(F, q, p1)
    g2 = holonomy_transport(F, g1(q), p2)
    g12 = holonomy_transport(F, q, p1.then(p2))
    assert abs(g1.compose(g2).derivative - g12.derivative) < 1e-8 * abs(g12.derivative)
    back = g1.compose(holonomy_transport(F, g1(q), p1.reversed()))
    assert abs(back.derivative - 1) < 2e-8
    # linear maps: derivative equals the multiplier, checked by finite differences of the map itself
    h = 1e-6
    fd = (g1(AffinePoint2(1.0, 0.3 + h)).c2 - g1(AffinePoint2(1.0, 0.3 - h)).c2) / (2 * h)
    assert abs(fd - g1.derivative) < 1e-8 * abs(g1.derivative)


def test_path_errors():
    F = LinearFoliation.from_alpha(1j)
    with pytest.raises(PathThroughSingularity):
        integrate_leaf(F, segment_path(-1.0, 1.0))
    with pytest.raises(HolonomyUndefined):
        holonomy_transport(F, AffinePoint2(2.0, 1.0), segment_path(1.0, 3.0))
    with pytest.raises(ValueError):
        integrate_leaf(F, circle_loop(), tol=1e-2)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_integration_is_fast(alpha):
    F = LinearFoliation.from_alpha(alpha)
    integrate_leaf(F, axis_loop(Axis.SECOND), 1e-9)
    t = time.perf_counter()
    integrate_leaf(F, axis_loop(Axis.SECOND), 1e-9)
    assert time.perf_counter() - t < 0.1
