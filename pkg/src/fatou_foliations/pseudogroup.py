"""A desk-scale holonomy pseudogroup on a transversal T in C.

Generators are Moebius maps whose domains are finite intersections of
generalized discs (interiors or exteriors of circles, or half-planes).  A
generalized disc is stored as a Hermitian matrix ``H`` with

    D = { z : (z, 1)^* H (z, 1) < 0 },

so the preimage of ``D`` under a Moebius map with matrix ``M`` is given by
``M^* H M`` exactly.  Word domains are tracked this way; an independent
route pushes discs forward through the maps (image of a circle under a
Moebius map) and bisects on the radius.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .errors import EmptySample, InvalidConstants, NotIsometric

LINE_TOL = 1e-14


@dataclass(frozen=True)
class Mobius:
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for k in "abcd":
            object.__setattr__(self, k, complex(getattr(self, k)))
        if abs(self.det) == 0:
            raise ValueError("degenerate Moebius map")

    @classmethod
    def from_matrix(cls, m) -> "Mobius":
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def affine(cls, a, b=0.0) -> "Mobius":
        return cls(a, b, 0.0, 1.0)

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def disc_automorphism(cls, theta: float, a: complex) -> "Mobius":
        """``z -> e^{i theta} (z + a)/(1 + conj(a) z)``, ``|a| < 1``."""
        e = cmath.exp(1j * theta)
        return cls(e, e * a, complex(a).conjugate(), 1.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def is_affine(self) -> bool:
        return self.c == 0

    @property
    def pole(self):
        return None if self.c == 0 else -self.d / self.c

    def __call__(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def deriv(self, z):
        return self.det / (self.c * z + self.d) ** 2

    def then(self, other: "Mobius") -> "Mobius":
        """``other`` after ``self``."""
        return Mobius.from_matrix(other.matrix @ self.matrix)

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def close_to(self, other: "Mobius", tol=1e-12) -> bool:
        m1, m2 = self.matrix, other.matrix
        k = int(np.argmax(np.abs(m1)))
        s = m2.flat[k] / m1.flat[k]
        return bool(np.max(np.abs(m1 * s - m2)) <= tol * max(1.0, float(np.max(np.abs(m2)))))


@dataclass(frozen=True, eq=False)
class GDisc:
    """Generalized disc ``{z : (z,1)^* H (z,1) < 0}``."""

    H: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        H = 0.5 * (H + H.conj().T)
        s = float(np.max(np.abs(H)))
        if s == 0:
            raise ValueError("zero Hermitian form")
        object.__setattr__(self, "H", H / s)

    @classmethod
    def disc(cls, center, radius) -> "GDisc":
        c = complex(center)
        return cls(np.array([[1.0, -c], [-c.conjugate(), abs(c) ** 2 - radius**2]], dtype=complex))

    @classmethod
    def exterior(cls, center, radius) -> "GDisc":
        return cls(-cls.disc(center, radius).H)

    def q(self, z):
        A, B, C = self.H[0, 0].real, self.H[0, 1], self.H[1, 1].real
        z = np.asarray(z, dtype=complex)
        return A * np.abs(z) ** 2 + 2 * np.real(np.conj(z) * B) + C

    def contains(self, z) -> np.ndarray:
        return self.q(z) < 0

    def pullback(self, m: Mobius) -> "GDisc":
        M = m.matrix
        return GDisc(M.conj().T @ self.H @ M)

    def image(self, m: Mobius) -> "GDisc":
        return self.pullback(m.inverse())

    @property
    def kind(self) -> str:
        A = self.H[0, 0].real
        if abs(A) <= LINE_TOL:
            return "halfplane"
        return "disc" if A > 0 else "exterior"

    def circle(self):
        """``(center, radius^2)`` of the boundary circle (not for half-planes)."""
        A, B, C = self.H[0, 0].real, self.H[0, 1], self.H[1, 1].real
        c = -B / A
        return complex(c), float(abs(B) ** 2 / A**2 - C / A)

    @property
    def center(self) -> complex:
        return self.circle()[0]

    @property
    def radius(self) -> float:
        return math.sqrt(max(self.circle()[1], 0.0))

    def signed_distance(self, z) -> np.ndarray:
        """Euclidean distance to the boundary, negative inside."""
        z = np.asarray(z, dtype=complex)
        k = self.kind
        if k == "halfplane":
            B, C = self.H[0, 1], self.H[1, 1].real
            return (2 * np.real(np.conj(z) * B) + C) / (2 * abs(B))
        c, r2 = self.circle()
        if r2 <= 0:
            # empty disc, or an exterior of a point (the whole plane)
            return np.full(z.shape, np.inf if k == "disc" else -np.inf)
        r = math.sqrt(r2)
        d = np.abs(z - c)
        return d - r if k == "disc" else r - d

    def contains_disc(self, center, radius) -> bool:
        return bool(self.signed_distance(complex(center)) <= -radius)

    def __repr__(self):
        if self.kind == "halfplane":
            return f"GDisc(halfplane H={self.H.tolist()})"
        return f"GDisc({self.kind}, center={self.center:.6g}, radius={self.radius:.6g})"


def disc(center, radius) -> GDisc:
    return GDisc.disc(center, radius)


@dataclass(frozen=True)
class Domain:
    """Intersection of generalized discs."""

    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    @classmethod
    def of(cls, *parts) -> "Domain":
        return cls(parts)

    def contains(self, z) -> bool:
        return all(bool(p.contains(z)) for p in self.parts)

    def radius_at(self, z) -> float:
        """Largest Euclidean radius of a disc about ``z`` inside the domain (0 if ``z`` is outside)."""
        r = min(float(-p.signed_distance(z)) for p in self.parts)
        return max(r, 0.0)

    def pullback(self, m: Mobius) -> "Domain":
        return Domain(tuple(p.pullback(m) for p in self.parts))

    def image(self, m: Mobius) -> "Domain":
        return Domain(tuple(p.image(m) for p in self.parts))

    def intersect(self, other: "Domain") -> "Domain":
        return Domain(self.parts + other.parts)

    def discs(self):
        return [p for p in self.parts if p.kind == "disc"]

    def reduced(self) -> "Domain":
        """Drop interior-disc constraints that contain another interior-disc constraint."""
        keep = list(self.parts)
        ds = [p for p in keep if p.kind == "disc"]
        for p in ds:
            for o in ds:
                if o is not p and o in keep and p in keep and p.contains_disc(o.center, o.radius):
                    keep.remove(p)
                    break
        return Domain(tuple(keep))

    def is_empty(self) -> bool:
        """Numerical emptiness test: minimize the largest signed distance."""
        if not self.parts:
            return False
        starts = [p.center for p in self.parts if p.kind != "halfplane"] or [0j]

        def worst(v):
            z = complex(v[0], v[1])
            return max(float(p.signed_distance(z)) for p in self.parts)

        for s in starts:
            if worst([s.real, s.imag]) < 0:
                return False
            res = minimize(worst, [s.real, s.imag], method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 2000})
            if res.fun < 0:
                return False
        return True

    def single_disc(self):
        """The domain as one disc when it reduces to one, else ``None``."""
        r = self.reduced()
        if len(r.parts) == 1 and r.parts[0].kind == "disc":
            return r.parts[0]
        return None


@dataclass(frozen=True)
class Generator:
    id: str
    map: Mobius
    domain: Domain
    extension: Domain

    def __post_init__(self):
        if isinstance(self.domain, GDisc):
            object.__setattr__(self, "domain", Domain.of(self.domain))
        if isinstance(self.extension, GDisc):
            object.__setattr__(self, "extension", Domain.of(self.extension))
        pole = self.map.pole
        if pole is not None and self.extension.contains(pole):
            raise ValueError(f"generator {self.id}: pole inside the extension")
        if not _closure_inside(self.domain, self.extension):
            raise ValueError(f"generator {self.id}: domain closure not inside the extension")

    def oriented(self, inverse: bool):
        """``(map, domain, extension)`` for the requested orientation."""
        if not inverse:
            return self.map, self.domain, self.extension
        return self.map.inverse(), self.domain.image(self.map), self.extension.image(self.map)


def _closure_inside(dom: Domain, ext: Domain) -> bool:
    ds = dom.discs()
    if not ds:
        return False
    # some interior disc containing dom must sit strictly inside every extension part
    return any(all(p.signed_distance(d.center) < -d.radius for p in ext.parts) for d in ds)


FORWARD = False
INVERSE = True


@dataclass(frozen=True)
class Word:
    """Generators applied left to right; ``map`` is the composite."""

    steps: tuple = ()
    map: Mobius = field(default_factory=Mobius.identity)
    domain: Domain = field(default_factory=lambda: Domain(()))
    extension: Domain = field(default_factory=lambda: Domain(()))

    def __len__(self):
        return len(self.steps)

    def label(self) -> str:
        return "".join(f"{g}{'^-1' if inv else ''} " for g, inv in self.steps).strip() or "id"

    def defined_at(self, p) -> bool:
        return self.domain.contains(p)

    def radius_at(self, p, which: str = "domain") -> float:
        d = self.domain if which == "domain" else self.extension
        return d.radius_at(p) if d.parts else math.inf


def identity_word() -> Word:
    return Word()


def compose(w: Word, g: Generator, orientation: bool = FORWARD) -> Word:
    """``g`` (or its inverse) after ``w``, with domains pulled back through ``w``."""
    m, dom, ext = g.oriented(orientation)
    return Word(
        w.steps + ((g.id, orientation),),
        w.map.then(m),
        w.domain.intersect(dom.pullback(w.map)),
        w.extension.intersect(ext.pullback(w.map)),
    )


def word_from(gens: dict, steps) -> Word:
    w = identity_word()
    for gid, inv in steps:
        w = compose(w, gens[gid], inv)
    return w


# ---------------------------------------------------------------- independent route


def disc_image(m: Mobius, center: complex, radius: float):
    """Image of the open disc ``D(center, radius)`` as ``(center, radius)``, or ``None`` if unbounded.

    Uses the reflection of the pole in the circle: its image is the image circle's center.
    """
    center = complex(center)
    if m.is_affine():
        return m(center), abs(m.a / m.d) * radius
    zp = m.pole
    off = zp - center
    if abs(off) <= radius:
        return None
    zs = center + radius**2 / off.conjugate()
    c1 = m(zs)
    r1 = abs(m(center + radius * off / abs(off)) - c1)
    return c1, r1


def oracle_radius(gens: dict, steps, p, which: str = "domain", r_max: float = 10.0, tol: float = 1e-13) -> float:
    """Largest ``r`` with every prefix image of ``D(p, r)`` inside the next generator's domain.

    Independent of :func:`compose`: discs are pushed forward and containment is
    tested on images, then ``r`` is found by bisection.
    """
    seq = []
    for gid, inv in steps:
        m, dom, ext = gens[gid].oriented(inv)
        seq.append((m, dom if which == "domain" else ext))

    def ok(r):
        c, rr = complex(p), r
        for m, region in seq:
            for part in region.parts:
                if not part.signed_distance(c) <= -rr:
                    return False
            img = disc_image(m, c, rr)
            if img is None:
                return False
            c, rr = img
        return True

    if not seq:
        return math.inf
    if not ok(0.0):
        return 0.0
    lo, hi = 0.0, r_max
    if ok(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------- metrics on T


@dataclass(frozen=True)
class ConformalMetric:
    """``h = rho(z)^2 |dz|^2``."""

    name: str
    rho: Callable
    c: float  # lower bound of rho on the region of interest

    def ball_disc(self, p: complex, radius: float):
        """Exact h-ball as a Euclidean ``(center, radius)`` when known, else ``None``."""
        if self.name == "euclidean":
            return complex(p), radius / self.c
        if self.name == "poincare":
            t = math.tanh(radius / 2.0)
            return disc_image(Mobius(1.0, p, complex(p).conjugate(), 1.0), 0j, t)
        return None


def euclidean_metric(scale: float = 1.0) -> ConformalMetric:
    return ConformalMetric("euclidean", lambda z: scale + 0 * np.abs(z), scale)


def poincare_metric() -> ConformalMetric:
    """``2|dz|/(1-|z|^2)`` on the unit disc; bounded below by 2."""
    return ConformalMetric("poincare", lambda z: 2.0 / (1.0 - np.abs(z) ** 2), 2.0)


def is_isometry(m: Mobius, h: ConformalMetric, pts, tol=1e-9):
    """``|m'(p)| rho(m(p)) = rho(p)`` at every point; returns ``(ok, worst relative defect, witness)``."""
    pts = np.asarray(pts, dtype=complex)
    if len(pts) == 0:
        return True, 0.0, None
    lhs = np.abs(m.deriv(pts)) * h.rho(m(pts))
    rhs = h.rho(pts)
    rel = np.abs(lhs - rhs) / np.abs(rhs)
    i = int(np.argmax(rel))
    return bool(rel[i] <= tol), float(rel[i]), complex(pts[i])


# ---------------------------------------------------------------- constants


def _orientations(gens, include_inverses):
    for g in gens:
        yield g, False
        if include_inverses:
            yield g, True


def _max_deriv_on_disc(m: Mobius, d: GDisc) -> float:
    if m.is_affine():
        return abs(m.a / m.d)
    dist = abs(m.pole - d.center) - d.radius
    if dist <= 0:
        return math.inf
    return abs(m.det) / (abs(m.c) * dist) ** 2


def estimate_constants(gens, K=None, mode: str = "analytic", include_inverses: bool = True):
    """``(delta, C)`` for the generators.

    ``analytic``: ``delta`` is the distance from the closure of each domain to
    the boundary of its extension and ``C`` bounds ``|g'|`` on the closed
    domain, both over every orientation.  ``sample``: the same quantities are
    evaluated only at the points of ``K`` that lie in a domain.
    """
    if mode == "sample":
        pts = np.asarray(K if K is not None else [], dtype=complex)
        if len(pts) == 0:
            raise EmptySample("no sample points")
        delta, C, used = math.inf, 1.0, 0
        for g, inv in _orientations(gens, include_inverses):
            m, dom, ext = g.oriented(inv)
            for p in pts:
                if dom.contains(p):
                    used += 1
                    delta = min(delta, ext.radius_at(p))
                    C = max(C, abs(m.deriv(p)))
        if used == 0:
            raise EmptySample("no sample point lies in a generator domain")
        return delta, C
    if not gens:
        raise EmptySample("no generators")
    delta, C = math.inf, 1.0
    for g, inv in _orientations(gens, include_inverses):
        m, dom, ext = g.oriented(inv)
        best_d, best_c = 0.0, math.inf
        for d in dom.discs():
            sd = min(float(-p.signed_distance(d.center)) for p in ext.parts) - d.radius
            best_d = max(best_d, sd)
            best_c = min(best_c, _max_deriv_on_disc(m, d))
        delta = min(delta, best_d)
        C = max(C, best_c)
    return delta, C


def extension_radius(delta: float, c: float, C: float) -> float:
    if not (delta > 0 and c > 0 and C >= 1):
        raise InvalidConstants(f"need delta > 0, c > 0, C >= 1; got {delta}, {c}, {C}")
    return delta * c / (2 * C)


@dataclass(frozen=True)
class ExtensionCertificate:
    delta: float
    C: float
    c: float

    @property
    def delta_prime(self) -> float:
        return extension_radius(self.delta, self.c, self.C)


# ---------------------------------------------------------------- verification


@dataclass
class ExtensionReport:
    n_points: int = 0
    n_words: int = 0
    max_length: int = 0
    delta_prime: float = 0.0
    effective_delta_prime: float = 0.0
    ball: str = "bound"
    isometric: bool = True
    isometry_defect: float = 0.0
    isometry_witness: object = None
    violations: list = field(default_factory=list)
    min_slack: float = math.inf

    @property
    def ok(self) -> bool:
        return self.isometric and not self.violations

    def as_dict(self):
        return {
            "n_points": self.n_points,
            "n_words": self.n_words,
            "max_length": self.max_length,
            "delta_prime": self.delta_prime,
            "effective_delta_prime": self.effective_delta_prime,
            "ball": self.ball,
            "isometric": self.isometric,
            "isometry_defect": self.isometry_defect,
            "violations": [dict(v) for v in self.violations[:20]],
            "n_violations": len(self.violations),
            "min_slack": self.min_slack,
        }


def verify_extension(gens, K, h: ConformalMetric, L: int, delta_prime: float, margin: float = math.inf,
                     ball: str = "bound", reduced: bool = True, iso_tol: float = 1e-9) -> ExtensionReport:
    """Check that every word of length ``<= L`` defined at a sample point extends to the h-ball.

    The h-ball ``B'_{delta'}(p)`` is replaced by the Euclidean disc
    ``D(p, delta'/c)`` (``ball="bound"``) or by its exact Euclidean shape
    (``ball="exact"``, Euclidean and Poincare metrics).  ``delta'`` is capped
    by ``margin`` so that the ball stays in U.
    """
    if L > 8:
        raise ValueError("word length is limited to 8")
    pts = np.asarray(K, dtype=complex)
    rep = ExtensionReport(n_points=len(pts), max_length=L, delta_prime=delta_prime, ball=ball)
    dp = min(delta_prime, margin)
    rep.effective_delta_prime = dp
    for g, inv in _orientations(gens, True):
        m, dom, _ = g.oriented(inv)
        inside = [p for p in pts if dom.contains(p)]
        ok, defect, wit = is_isometry(m, h, inside, iso_tol)
        if defect > rep.isometry_defect:
            rep.isometry_defect = defect
        if not ok:
            rep.isometric = False
            rep.isometry_witness = {"generator": g.id, "inverse": inv, "point": [wit.real, wit.imag]}
    gl = [(g, inv, *g.oriented(inv)) for g, inv in _orientations(gens, True)]
    for p in pts:
        if ball == "exact":
            bd = h.ball_disc(complex(p), dp)
            if bd is None:
                raise ValueError(f"no exact ball for metric {h.name}")
        else:
            bd = (complex(p), dp / h.c)
        _dfs(p, bd, gl, L, reduced, rep)
    if not rep.isometric:
        rep.violations.insert(0, {"kind": "NotIsometric", **(rep.isometry_witness or {})})
    return rep


def _dfs(p, bd, gl, L, reduced, rep):
    bc, br = bd
    # stack entries: (prefix map, current point, steps, min slack so far)
    stack = [(Mobius.identity(), complex(p), (), math.inf)]
    while stack:
        P, z, steps, slack = stack.pop()
        if len(steps) == L:
            continue
        for g, inv, m, dom, ext in gl:
            if reduced and steps and steps[-1] == (g.id, not inv):
                continue
            if not dom.contains(z):
                continue
            s = slack
            for part in ext.parts:
                s = min(s, float(-part.pullback(P).signed_distance(bc)) - br)
            new = steps + ((g.id, inv),)
            rep.n_words += 1
            rep.min_slack = min(rep.min_slack, s)
            if s < -1e-12:
                rep.violations.append({"point": [complex(p).real, complex(p).imag],
                                       "word": " ".join(f"{a}{'^-1' if b else ''}" for a, b in new),
                                       "slack": s})
            stack.append((P.then(m), m(z), new, s))


def check_isometric(gens, K, h: ConformalMetric, tol=1e-9):
    """Raise :class:`NotIsometric` unless every generator is an h-isometry on the samples."""
    pts = np.asarray(K, dtype=complex)
    for g, inv in _orientations(gens, True):
        m, dom, _ = g.oriented(inv)
        ok, defect, wit = is_isometry(m, h, [p for p in pts if dom.contains(p)], tol)
        if not ok:
            raise NotIsometric(f"generator {g.id}{'^-1' if inv else ''} is not an isometry at {wit} "
                               f"(relative defect {defect:.3g})")


def restrict(gens, T_prime) -> list:
    """Restriction to ``T'`` (a list of discs): domain and image inside one component each.

    A generator may split into several pieces, one per pair of components;
    empty pieces are dropped.
    """
    comps = [c if isinstance(c, GDisc) else GDisc.disc(*c) for c in T_prime]
    out = []
    for g in gens:
        pieces = []
        for i, src in enumerate(comps):
            for j, dst in enumerate(comps):
                dom = Domain(g.domain.parts + (src, dst.pullback(g.map))).reduced()
                if dom.is_empty():
                    continue
                pieces.append(dom)
        for k, dom in enumerate(pieces):
            gid = g.id if len(pieces) == 1 else f"{g.id}.{k}"
            out.append(Generator(gid, g.map, dom, g.extension))
    return out


def sample_disc(rng: np.random.Generator, center, radius, n) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    return complex(center) + r * np.exp(2j * np.pi * rng.random(n))
