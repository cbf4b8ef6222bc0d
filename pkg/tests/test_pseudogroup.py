import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fatou_foliations.errors import EmptySample, InvalidConstants, NotIsometric
from fatou_foliations.pseudogroup import (
    INVERSE, Domain, GDisc, Generator, Mobius, check_isometric, compose, disc, disc_image, estimate_constants,
    euclidean_metric, extension_radius, identity_word, is_isometry, oracle_radius, poincare_metric, restrict,
    sample_disc, verify_extension, word_from,
)

angle = st.floats(0, 2 * math.pi)
small = st.complex_numbers(max_magnitude=0.4, allow_nan=False, allow_infinity=False)


def _rot(gid, th, r=0.8, R=1.0):
    return Generator(gid, Mobius.affine(cmath.exp(1j * th)), disc(0, r), disc(0, R))


def test_mobius_basics():
    m = Mobius(1, 2, 3, 4)
    z = 0.3 + 0.1j
    assert m.inverse()(m(z)) == pytest.approx(z)
    assert m.then(m.inverse()).close_to(Mobius.identity())
    h = 1e-7
    assert m.deriv(z) == pytest.approx((m(z + h) - m(z - h)) / (2 * h), rel=1e-7)
    assert m.pole == pytest.approx(-4 / 3)
    with pytest.raises(ValueError):
        Mobius(1, 1, 1, 1)


@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), st.floats(0.05, 2),
       st.tuples(*[st.complex_numbers(min_magnitude=0.1, max_magnitude=3, allow_nan=False,
                                      allow_infinity=False)] * 4))
def test_gdisc_pullback_matches_preimage(c, r, abcd):
    try:
        m = Mobius(*abcd)
    except ValueError:
        return
    if abs(m.det) < 1e-3:
        return
    D = disc(c, r)
    pre = D.pullback(m)
    rng = np.random.default_rng(0)
    z = rng.normal(size=200) * 2 + 1j * rng.normal(size=200) * 2
    w = m(z)
    margin = np.abs(D.signed_distance(w)) > 1e-6
    assert np.array_equal(pre.contains(z)[margin], D.contains(w)[margin])


@given(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), st.floats(0.1, 1),
       st.tuples(*[st.complex_numbers(min_magnitude=0.1, max_magnitude=3, allow_nan=False,
                                      allow_infinity=False)] * 4))
def test_disc_image_oracle_matches_gdisc_image(c, r, abcd):
    try:
        m = Mobius(*abcd)
    except ValueError:
        return
    img = disc_image(m, c, r)
    if img is None:
        return
    G = disc(c, r).image(m)
    if G.kind != "disc":
        return
    assert G.center == pytest.approx(img[0], abs=1e-7 * max(1, abs(img[0])))
    assert G.radius == pytest.approx(img[1], rel=1e-7)


def test_compose_examples():
    g = Generator("g", Mobius.affine(0.5, 0.1), disc(0, 1), disc(0, 1.5))
    w = compose(identity_word(), g)
    assert w.map.close_to(g.map) and w.domain.contains(0.9) and not w.domain.contains(1.01)
    w2 = compose(w, g)
    assert w2.map.close_to(Mobius.affine(0.25, 0.15))
    d = w2.domain.single_disc()
    assert d is not None and d.center == pytest.approx(0) and d.radius == pytest.approx(1.0)
    inv = compose(w, g, INVERSE)
    assert inv.map.close_to(Mobius.identity(), 1e-12)


@given(st.lists(st.tuples(st.sampled_from(["a", "b"]), st.booleans()), min_size=1, max_size=5),
       st.complex_numbers(max_magnitude=0.5, allow_nan=False, allow_infinity=False))
def test_domain_monotone_and_matches_oracle(steps, p):
    gens = {"a": Generator("a", Mobius.affine(0.9, 0.05), disc(0, 0.9), disc(0, 1.2)),
            "b": Generator("b", Mobius.disc_automorphism(0.4, 0.2), disc(0.1, 0.7), disc(0.1, 0.8))}
    prev = math.inf
    for k in range(1, len(steps) + 1):
        w = word_from(gens, steps[:k])
        r = w.radius_at(p) if w.defined_at(p) else 0.0
        assert r <= prev + 1e-12
        prev = r
        assert r == pytest.approx(oracle_radius(gens, steps[:k], p), abs=1e-9)
        re = w.radius_at(p, "extension") if w.extension.contains(p) else 0.0
        assert re == pytest.approx(oracle_radius(gens, steps[:k], p, "extension"), abs=1e-9)


def test_estimate_constants_examples(rng):
    K = sample_disc(rng, 0, 1, 200)
    for m in (0.5, 1.5):
        g = Generator("m", Mobius.affine(m), disc(0, 1.0 + 1e-9), disc(0, 2))
        delta, C = estimate_constants([g], K, mode="sample", include_inverses=False)
        assert delta >= 1 - 1e-6 and C == pytest.approx(max(1, m))
    ident = Generator("id", Mobius.identity(), disc(0, 1), disc(0, 2))
    assert estimate_constants([ident])[1] == 1
    rot = _rot("r", 0.7)
    assert estimate_constants([rot]) == (pytest.approx(0.2), 1.0)
    with pytest.raises(EmptySample):
        estimate_constants([rot], [], mode="sample")


def test_extension_radius_examples():
    assert extension_radius(0.1, 0.5, 2) == pytest.approx(0.0125)
    assert extension_radius(1, 1, 1) == pytest.approx(0.5)
    assert extension_radius(0.3, 2, 3) == pytest.approx(0.1)
    with pytest.raises(InvalidConstants):
        extension_radius(0.1, 0.5, 0.5)


def test_verify_extension_examples(rng):
    gens = [_rot("r1", 1.0), _rot("r2", 2.3)]
    K = sample_disc(rng, 0, 0.8, 20)
    delta, C = estimate_constants(gens)
    rep = verify_extension(gens, K, euclidean_metric(), 6, extension_radius(delta, 1.0, C))
    assert rep.ok and rep.n_words > 0
    t = [Generator("t", Mobius.affine(1, 0.1), disc(0, 1), disc(0, 1.5))]
    delta, C = estimate_constants(t)
    assert delta == pytest.approx(0.5)
    rep = verify_extension(t, sample_disc(rng, 0, 1, 20), euclidean_metric(), 6, extension_radius(delta, 1, C))
    assert rep.ok and rep.effective_delta_prime == pytest.approx(0.25)
    s = [Generator("s", Mobius.affine(2), disc(0, 0.3), disc(0, 0.5))]
    rep = verify_extension(s, sample_disc(rng, 0, 0.3, 10), euclidean_metric(), 3, 0.1)
    assert not rep.ok and rep.violations[0]["kind"] == "NotIsometric"
    with pytest.raises(NotIsometric):
        check_isometric(s, sample_disc(rng, 0, 0.3, 10), euclidean_metric())
    with pytest.raises(ValueError):
        verify_extension(gens, K, euclidean_metric(), 9, 0.1)


def test_too_large_radius_is_caught(rng):
    # a radius beyond the extension margin must produce violations
    gens = [_rot("r1", 1.0)]
    rep = verify_extension(gens, sample_disc(rng, 0, 0.8, 20), euclidean_metric(), 2, 0.6)
    assert rep.violations and rep.min_slack < 0


@settings(max_examples=25)
@given(angle, angle, small, small, st.integers(0, 1000))
def test_delta_prime_soundness_poincare(t1, t2, a1, a2, seed):
    # disc automorphisms on the hyperbolic disc are isometries of the Poincare metric
    gens = [Generator("p", Mobius.disc_automorphism(t1, a1), disc(0, 0.4), disc(0, 0.6)),
            Generator("q", Mobius.disc_automorphism(t2, a2), disc(0, 0.4), disc(0, 0.6))]
    delta, C = estimate_constants(gens)
    if delta <= 0:
        return
    h = poincare_metric()
    K = sample_disc(np.random.default_rng(seed), 0, 0.4, 6)
    dp = extension_radius(delta, h.c, C)
    for ball in ("bound", "exact"):
        rep = verify_extension(gens, K, h, 4, dp, ball=ball)
        assert rep.isometric and not rep.violations, rep.as_dict()


@settings(max_examples=25)
@given(angle, angle, st.integers(0, 1000))
def test_delta_prime_soundness_rotations(t1, t2, seed):
    gens = [_rot("a", t1), _rot("b", t2)]
    delta, C = estimate_constants(gens)
    K = sample_disc(np.random.default_rng(seed), 0, 0.8, 6)
    rep = verify_extension(gens, K, euclidean_metric(), 5, extension_radius(delta, 1.0, C))
    assert rep.ok


@given(angle, angle, st.complex_numbers(max_magnitude=0.7, allow_nan=False, allow_infinity=False))
def test_rotation_conjugation_invariance(t1, phi, p):
    gens = {"a": _rot("a", t1), "b": _rot("b", 2 * t1 + 0.3)}
    w = word_from(gens, [("a", False), ("b", True), ("a", False)])
    q = cmath.exp(1j * phi) * p
    assert w.radius_at(p) == pytest.approx(w.radius_at(q), abs=1e-12)


def test_isometry_checks():
    h = poincare_metric()
    m = Mobius.disc_automorphism(0.3, 0.2 + 0.1j)
    assert is_isometry(m, h, sample_disc(np.random.default_rng(0), 0, 0.5, 50))[0]
    assert not is_isometry(Mobius.affine(0.5), h, [0.1, 0.2])[0]


def test_restrict_examples():
    g = Generator("g", Mobius.affine(1, 0.2), disc(0, 1), disc(0, 1.5))
    same = restrict([g], [disc(0, 5)])
    assert len(same) == 1
    assert restrict([g], [disc(10, 0.5)]) == []
    r = restrict([g], [disc(0, 0.5)])
    assert len(r) == 1
    rng = np.random.default_rng(0)
    z = rng.uniform(-1, 1, 2000) + 1j * rng.uniform(-1, 1, 2000)
    want = (np.abs(z) < 0.5) & (np.abs(z + 0.2) < 0.5)
    got = np.array([r[0].domain.contains(v) for v in z])
    assert np.array_equal(got, want)


def test_domain_emptiness():
    assert Domain.of(disc(0, 1), disc(3, 1)).is_empty()
    assert not Domain.of(disc(0, 1), disc(1.5, 1)).is_empty()
    assert GDisc.exterior(0, 1).contains(2) and not GDisc.exterior(0, 1).contains(0.5)
