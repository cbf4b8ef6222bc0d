"""Compact approximations {K_n} with defining functions, nesting and boundary transversality.

Each family is described by a real defining function ``g`` and thresholds
depending on ``n``:

* ``GE``: ``K_n = {g >= lo(n)}``
* ``LE``: ``K_n = {g <= hi(n)}``
* ``INTERVAL``: ``K_n = {lo(n) <= g <= hi(n)}``

For projective families ``g`` is homogeneous of degree 0 and is evaluated on
homogeneous vectors; its restriction to the XY chart drives the boundary
transversality test ``sum_i X_i dg/dz_i``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .charts import AffinePoint2, ChartId, ProjectivePoint, chart_transition
from .errors import IndexTooSmall, MixedBoundary, NotOnBoundary, SingularPoint
from .foliation import Ambient, LinearFoliation, tangent_field
from .regions import RegionKind, RegionSpec

BOUNDARY_TOL = 1e-9


class Side(Enum):
    GE = "ge"
    LE = "le"
    INTERVAL = "interval"


class BoundaryKind(Enum):
    TRANSVERSAL = "TransversalBoundary"
    TANGENT = "TangentBoundary"


@dataclass(frozen=True)
class Certificate:
    """Provenance of compact generation of the restricted holonomy pseudogroup."""

    kind: str  # "Compact" | "TangentProduct" | "Asserted"
    note: str = ""

    def as_dict(self):
        return {"kind": self.kind, "note": self.note}


COMPACT = Certificate("Compact", "K_n is a compact subset of the ambient space")
TANGENT_PRODUCT = Certificate("TangentProduct", "boundary saturated by leaves; product foliation near the boundary")


def _abs2(z):
    return np.abs(z) ** 2


class Family:
    ambient: Ambient = Ambient.AFFINE2
    side: Side = Side.GE
    anchor = (0.0, 0.0)  # log-moduli of a point inside every K_n
    certificate: Certificate = COMPACT

    def levels(self, n: int):
        raise NotImplementedError

    def g_xy(self, x, y):
        raise NotImplementedError

    def grad_xy(self, x, y):
        """Closed-form Wirtinger gradient ``(dg/dx, dg/dy)`` in the XY chart."""
        raise NotImplementedError

    def g_hom(self, z):
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.g_xy(z[:, 0] / z[:, 2], z[:, 1] / z[:, 2])

    @property
    def min_index(self) -> int:
        return 1

    @property
    def name(self) -> str:
        return type(self).__name__

    def region(self) -> RegionSpec:
        raise NotImplementedError

    def contains_values(self, g, n):
        lo, hi = self.levels(n)
        g = np.asarray(g, dtype=float)
        with np.errstate(invalid="ignore"):
            if self.side is Side.GE:
                return g >= lo
            if self.side is Side.LE:
                return g <= hi
            return (g >= lo) & (g <= hi)

    def contains_hom(self, z, n):
        return self.contains_values(self.g_hom(z), n)

    def index_for_value(self, g: float):
        """Smallest ``n >= 1`` with ``g`` inside ``K_n`` (``None`` if none)."""
        raise NotImplementedError


class _GEInverse(Family):
    """``K_n = {g >= 1/n}``."""

    def levels(self, n):
        return 1.0 / n, math.inf

    def index_for_value(self, g):
        if not g > 0:
            return None
        if math.isinf(g):
            return 1
        return max(1, math.ceil(1.0 / g - 1e-12))


class _IntervalFamily(Family):
    side = Side.INTERVAL

    def levels(self, n):
        return 1.0 / n, float(n)

    def index_for_value(self, g):
        if not (0 < g < math.inf):
            return None
        return max(1, math.ceil(max(g, 1.0 / g) - 1e-12))


class SphereComplement(Family):
    """``K_n = {|z|^2 + |w|^2 >= 1/n^2}``."""

    certificate = Certificate("Asserted", "holonomy generated by the two axis loops of the linear flow")

    def levels(self, n):
        return 1.0 / n**2, math.inf

    def g_xy(self, x, y):
        return _abs2(x) + _abs2(y)

    def grad_xy(self, x, y):
        return np.conj(x), np.conj(y)

    def index_for_value(self, g):
        if not g > 0:
            return None
        return max(1, math.ceil(1.0 / math.sqrt(g) - 1e-12))

    def region(self):
        return RegionSpec(Ambient.AFFINE2, RegionKind.COMPLEMENT_OF_ORIGIN)


@dataclass(frozen=True, eq=True)
class SiegelLevel(_GEInverse):
    """``K_n = {|z| |w|^{-alpha} >= 1/n}`` for real ``alpha < 0``; saturated by leaves."""

    alpha: float = -1.0
    certificate = TANGENT_PRODUCT

    def g_xy(self, x, y):
        return np.abs(x) * np.abs(y) ** (-self.alpha)

    def grad_xy(self, x, y):
        g = self.g_xy(x, y)
        return g / (2 * x), -self.alpha * g / (2 * y)

    def region(self):
        return RegionSpec(Ambient.AFFINE2, RegionKind.COMPLEMENT_OF_AXES)


class ProjectiveTriple(Family):
    """CP^2 minus three open chart balls of radius ``1/n`` about the coordinate points."""

    ambient = Ambient.PROJECTIVE2

    def levels(self, n):
        return 1.0 / n**2, math.inf

    @property
    def min_index(self):
        # the closed balls about [0:0:1] and [0:1:0] of radius r meet iff r >= 1
        n = 1
        while not (1.0 / n < 1.0):
            n += 1
        return n

    def pieces_xy(self, x, y):
        ax, ay = _abs2(x), _abs2(y)
        with np.errstate(divide="ignore"):
            return np.stack([ax + ay, (ax + 1) / ay, (ay + 1) / ax])

    def g_xy(self, x, y):
        return np.min(self.pieces_xy(x, y), axis=0)

    def g_hom(self, z):
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        a = _abs2(z)
        out = []
        for k in range(3):
            others = a.sum(axis=1) - a[:, k]
            with np.errstate(divide="ignore", invalid="ignore"):
                out.append(np.where(a[:, k] > 0, others / np.where(a[:, k] > 0, a[:, k], 1), np.inf))
        return np.min(np.stack(out), axis=0)

    def grad_xy(self, x, y):
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        k = np.argmin(self.pieces_xy(x, y), axis=0)
        ax, ay = _abs2(x), _abs2(y)
        with np.errstate(divide="ignore", invalid="ignore"):
            g0 = (np.conj(x), np.conj(y))
            g1 = (np.conj(x) / ay, -(ax + 1) / (ay * y))
            g2 = (-(ay + 1) / (ax * x), np.conj(y) / ax)
        gx = np.choose(k, [g0[0], g1[0], g2[0]])
        gy = np.choose(k, [g0[1], g1[1], g2[1]])
        return gx, gy

    def index_for_value(self, g):
        if not g > 0:
            return None
        if math.isinf(g):
            return self.min_index
        return max(self.min_index, math.ceil(1.0 / math.sqrt(g) - 1e-12))

    def region(self):
        return RegionSpec(Ambient.PROJECTIVE2, RegionKind.CUSTOM, predicate=lambda x, y: (x != 0) | (y != 0),
                          label="CP^2 minus the three coordinate points")


class ProjectiveF(_GEInverse):
    """``K_n = {f >= 1/n}``, ``f = |z0|^2|z1|^2|z2|^2 / (|z0|^2+|z1|^2+|z2|^2)^3``."""

    ambient = Ambient.PROJECTIVE2

    @property
    def min_index(self):
        return 28

    def g_xy(self, x, y):
        ax, ay = _abs2(x), _abs2(y)
        return ax * ay / (1 + ax + ay) ** 3

    def g_hom(self, z):
        a = _abs2(np.atleast_2d(np.asarray(z, dtype=complex)))
        return a[:, 0] * a[:, 1] * a[:, 2] / a.sum(axis=1) ** 3

    def grad_xy(self, x, y):
        ax, ay = _abs2(x), _abs2(y)
        d4 = (1 + ax + ay) ** 4
        return (np.conj(x) * ay * (1 - 2 * ax + ay) / d4, np.conj(y) * ax * (1 - 2 * ay + ax) / d4)

    def region(self):
        return RegionSpec(Ambient.PROJECTIVE2, RegionKind.COMPLEMENT_OF_COORD_TRIANGLE)


class AnnulusNormSq(_IntervalFamily):
    """``K_n = {1/n <= |x|^2 + |y|^2 <= n}``."""

    anchor = (math.log(math.sqrt(0.5)), math.log(math.sqrt(0.5)))

    def g_xy(self, x, y):
        return _abs2(x) + _abs2(y)

    def grad_xy(self, x, y):
        return np.conj(x), np.conj(y)

    def region(self):
        return RegionSpec(Ambient.AFFINE2, RegionKind.COMPLEMENT_OF_ORIGIN)


class AnnulusProduct(_IntervalFamily):
    """``K_n = {1/n <= |x||y| <= n}``."""

    certificate = Certificate("TangentProduct", "boundary saturated for alpha = -1 (|x||y| is a first integral)")

    def g_xy(self, x, y):
        return np.abs(x) * np.abs(y)

    def grad_xy(self, x, y):
        g = self.g_xy(x, y)
        return g / (2 * x), g / (2 * y)

    def region(self):
        return RegionSpec(Ambient.AFFINE2, RegionKind.COMPLEMENT_OF_AXES)


@dataclass(frozen=True, eq=True)
class WeightedCone(_GEInverse):
    """``K_n = {|z1|^{1-alpha} |z2|^alpha >= |z0|/n}`` for ``0 < alpha < 1``.

    With ``swap`` the roles of ``z0`` and ``z1`` are exchanged.
    """

    alpha: float = 0.5
    swap: bool = False
    ambient = Ambient.PROJECTIVE2

    def _xy(self, x, y):
        return (y, x) if self.swap else (x, y)

    def g_xy(self, x, y):
        x, y = self._xy(np.asarray(x, dtype=complex), np.asarray(y, dtype=complex))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs(y) ** (1 - self.alpha) / np.abs(x)

    def grad_xy(self, x, y):
        g = self.g_xy(x, y)
        x, y = self._xy(np.asarray(x, dtype=complex), np.asarray(y, dtype=complex))
        gx, gy = -g / (2 * x), (1 - self.alpha) * g / (2 * y)
        return (gy, gx) if self.swap else (gx, gy)

    def g_hom(self, z):
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        a = np.abs(z)
        z0, z1 = (a[:, 1], a[:, 0]) if self.swap else (a[:, 0], a[:, 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            return z1 ** (1 - self.alpha) * a[:, 2] ** self.alpha / z0

    def contains_hom(self, z, n):
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        a = np.abs(z) / np.linalg.norm(z, axis=1, keepdims=True)
        z0, z1 = (a[:, 1], a[:, 0]) if self.swap else (a[:, 0], a[:, 1])
        return z1 ** (1 - self.alpha) * a[:, 2] ** self.alpha >= z0 / n

    @property
    def certificate(self):
        return TANGENT_PRODUCT if abs(self.alpha - 0.5) < 1e-12 else COMPACT

    def region(self):
        return RegionSpec(Ambient.PROJECTIVE2, RegionKind.COMPLEMENT_OF_TWO_LINES, swap=self.swap)


class AffineConeG1(_GEInverse):
    """``K_n = {|z0|^2 + |z1|^2 >= |z2|^2/n}``: the XY part is ``|x|^2+|y|^2 >= 1/n`` plus the line at infinity."""

    ambient = Ambient.PROJECTIVE2

    def g_xy(self, x, y):
        return _abs2(x) + _abs2(y)

    def g_hom(self, z):
        a = _abs2(np.atleast_2d(np.asarray(z, dtype=complex)))
        with np.errstate(divide="ignore"):
            return (a[:, 0] + a[:, 1]) / a[:, 2]

    def grad_xy(self, x, y):
        return np.conj(x), np.conj(y)

    def region(self):
        return RegionSpec(Ambient.PROJECTIVE2, RegionKind.COMPLEMENT_OF_POINT)


class HalfSpaceX(_GEInverse):
    """``K_n = {|x| >= 1/n}``."""

    certificate = Certificate("Asserted", "translation-type holonomy along the x direction")

    def g_xy(self, x, y):
        return np.abs(np.asarray(x, dtype=complex)) + 0 * np.abs(y)

    def grad_xy(self, x, y):
        x = np.asarray(x, dtype=complex)
        return np.abs(x) / (2 * x), np.zeros_like(np.asarray(y, dtype=complex))

    def region(self):
        return RegionSpec(Ambient.AFFINE2, RegionKind.HALF_SPACE_Y_NONZERO)


@dataclass(frozen=True, eq=True)
class LevelSlab(Family):
    """``K_n = {|a x + b y| <= n}``; saturated when the leaves are the lines ``a x + b y = c``."""

    a: complex = 1.0
    b: complex = 1.0
    side = Side.LE
    anchor = (-5.0, -5.0)
    certificate = TANGENT_PRODUCT

    def levels(self, n):
        return -math.inf, float(n)

    def g_xy(self, x, y):
        return np.abs(self.a * np.asarray(x, dtype=complex) + self.b * np.asarray(y, dtype=complex))

    def grad_xy(self, x, y):
        L = self.a * np.asarray(x, dtype=complex) + self.b * np.asarray(y, dtype=complex)
        u = np.conj(L) / (2 * np.abs(L))
        return self.a * u, self.b * u

    def index_for_value(self, g):
        return max(1, math.ceil(g - 1e-12))

    def region(self):
        return RegionSpec(Ambient.AFFINE2, RegionKind.WHOLE)


FAMILIES = {
    "SphereComplement": SphereComplement,
    "SiegelLevel": SiegelLevel,
    "ProjectiveTriple": ProjectiveTriple,
    "ProjectiveF": ProjectiveF,
    "AnnulusNormSq": AnnulusNormSq,
    "AnnulusProduct": AnnulusProduct,
    "WeightedCone": WeightedCone,
    "AffineConeG1": AffineConeG1,
    "HalfSpaceX": HalfSpaceX,
    "LevelSlab": LevelSlab,
}


def make_family(name: str, **params) -> Family:
    return FAMILIES[name](**params)


# ---------------------------------------------------------------- point handling


def _as_hom(p):
    if isinstance(p, ProjectivePoint):
        return p.coords
    if isinstance(p, AffinePoint2):
        if p.chart is ChartId.XY:
            return np.array([p.c1, p.c2, 1.0], dtype=complex)
        from .charts import homogeneous

        return homogeneous(p)
    z = np.asarray(p, dtype=complex)
    if z.shape == (2,):
        return np.array([z[0], z[1], 1.0], dtype=complex)
    return z


@dataclass(frozen=True)
class DefiningValue:
    g: float
    side: Side
    level: tuple


def defining_function(fam: Family, p, n: int | None = None) -> DefiningValue:
    n = fam.min_index if n is None else n
    g = float(fam.g_hom(_as_hom(p))[0])
    return DefiningValue(g, fam.side, fam.levels(n))


def contains(fam: Family, n: int, p) -> bool:
    if n < fam.min_index:
        raise IndexTooSmall(f"{fam.name} needs n >= {fam.min_index}, got {n}")
    return bool(fam.contains_hom(_as_hom(p), n)[0])


def min_index(fam: Family) -> int:
    return fam.min_index


def index_of(fam: Family, p):
    """Smallest admissible ``n`` with ``p`` in ``K_n``, or ``None``."""
    g = float(fam.g_hom(_as_hom(p))[0])
    if math.isnan(g):
        n = fam.min_index
        return n if contains(fam, n, p) else None
    k = fam.index_for_value(g)
    if k is None:
        return None
    k = max(k, fam.min_index)
    # guard against rounding at the threshold
    for m in (k, k + 1):
        if contains(fam, m, p):
            return m
    return None


def _sample_members(fam: Family, n: int, count: int, rng: np.random.Generator):
    """Points of ``K_n`` in XY coordinates, drawn around the family anchor."""
    xs, ys = [], []
    tries = 0
    while len(xs) < count and tries < 200 * count:
        tries += 1
        lm = np.array(fam.anchor) + rng.normal(scale=1.5, size=2)
        ph = np.exp(2j * np.pi * rng.random(2))
        x, y = np.exp(lm[0]) * ph[0], np.exp(lm[1]) * ph[1]
        if fam.contains_values(fam.g_xy(np.array([x]), np.array([y])), n)[0]:
            xs.append(x)
            ys.append(y)
    return np.array(xs, dtype=complex), np.array(ys, dtype=complex)


def nesting_check(fam: Family, n: int, n_samples: int = 500, seed: int = 0) -> bool:
    """All sampled points of ``K_n`` satisfy the strict inequalities of ``K_{n+1}``."""
    if n < fam.min_index:
        raise IndexTooSmall(f"{fam.name} needs n >= {fam.min_index}, got {n}")
    lo, hi = fam.levels(n)
    lo1, hi1 = fam.levels(n + 1)
    if not (lo1 < lo or lo == -math.inf) or not (hi1 > hi or hi == math.inf):
        return False
    rng = np.random.default_rng(seed)
    x, y = _sample_members(fam, n, n_samples, rng)
    bx, by, _ = boundary_samples(fam, n, max(1, n_samples // 5), rng)
    g = fam.g_xy(np.concatenate([x, bx]), np.concatenate([y, by]))
    with np.errstate(invalid="ignore"):
        strict = np.ones(len(g), dtype=bool)
        if lo1 > -math.inf:
            strict &= g > lo1
        if hi1 < math.inf:
            strict &= g < hi1
    return bool(np.all(strict))


def union_check(fam: Family, region: RegionSpec | None = None, n_samples: int = 1000):
    """Every sampled point of U lies in some ``K_n``; returns ``(ok, max index used)``."""
    region = region or fam.region()
    x, y = region.sample_xy(n_samples)
    g = fam.g_xy(x, y)
    worst = fam.min_index
    for gi in g:
        k = fam.index_for_value(float(gi)) if not math.isnan(gi) else fam.min_index
        if k is None:
            return False, None
        worst = max(worst, k, fam.min_index)
    return True, int(worst)


# ---------------------------------------------------------------- boundary sampling


RAY_STEP = 0.25
RAY_MAX = 60.0
ROOT_ITERS = 100


def _ray_xy(fam, th, ph, s):
    """Points ``exp(anchor + s (cos th, sin th))`` with phases ``ph`` (shape (m, 2), in turns)."""
    x = np.exp(fam.anchor[0] + s * np.cos(th) + 2j * np.pi * ph[:, 0])
    y = np.exp(fam.anchor[1] + s * np.sin(th) + 2j * np.pi * ph[:, 1])
    return x, y


def _inside(fam, n, x, y):
    with np.errstate(all="ignore"):
        g = np.asarray(fam.g_xy(x, y), dtype=float)
    return fam.contains_values(g, n) & np.isfinite(g), g


def _march(fam, n, th, ph, s0: float = 0.0):
    """Vectorized search for the first exit from ``K_n`` along each ray, then bisection.

    Marching starts at ``s0`` (a warm start for nearby rays).  Returns
    ``(ok, x, y, level, s)``; ``ok`` is false for rays that never leave
    ``K_n`` inside ``RAY_MAX``, meet a non-finite value, or start outside.
    """
    m = len(th)
    lo_lev, hi_lev = fam.levels(n)
    ok, _ = _inside(fam, n, *_ray_xy(fam, th, ph, np.full(m, s0)))
    s_in = np.full(m, s0)
    s_out = np.full(m, np.nan)
    g_out = np.full(m, np.nan)
    live = ok.copy()
    s = s0
    step = RAY_STEP if s0 == 0.0 else RAY_STEP / 8
    while s < RAY_MAX and live.any():
        s += step
        idx = np.nonzero(live)[0]
        inside, g = _inside(fam, n, *_ray_xy(fam, th[idx], ph[idx], np.full(len(idx), s)))
        bad = ~np.isfinite(g)
        ok[idx[bad]] = False
        left = idx[~inside & ~bad]
        s_out[left] = s
        g_out[left] = g[~inside & ~bad]
        s_in[idx[inside]] = s
        live[idx[~inside | bad]] = False
    ok &= np.isfinite(s_out)
    idx = np.nonzero(ok)[0]
    lev = np.where(g_out[idx] > hi_lev, hi_lev, lo_lev)
    # signed so that F > 0 inside K_n
    sgn = np.where(lev == lo_lev, 1.0, -1.0)
    tols = 1e-14 * np.maximum(1.0, np.abs(lev))

    def F(sv, rows):
        _, g = _inside(fam, n, *_ray_xy(fam, th[idx[rows]], ph[idx[rows]], sv))
        return sgn[rows] * (g - lev[rows])

    a, b = s_in[idx], s_out[idx]
    fa, fb = F(a, slice(None)), F(b, slice(None))
    c, fc = a.copy(), fa.copy()
    side = np.zeros(len(idx))
    active = np.ones(len(idx), dtype=bool)
    for _ in range(ROOT_ITERS):
        if not active.any():
            break
        r = np.nonzero(active)[0]
        cr = (a[r] * fb[r] - b[r] * fa[r]) / (fb[r] - fa[r])
        bad = ~np.isfinite(cr) | (cr <= np.minimum(a[r], b[r])) | (cr >= np.maximum(a[r], b[r]))
        cr = np.where(bad, 0.5 * (a[r] + b[r]), cr)
        fcr = F(cr, r)
        c[r], fc[r] = cr, fcr
        pos = fcr >= 0
        # Illinois: halve the stale end point's value when the same side is kept twice
        ka, kb = r[pos], r[~pos]
        fb[ka] = np.where(side[ka] == 1, 0.5 * fb[ka], fb[ka])
        a[ka], fa[ka] = c[ka], fc[ka]
        side[ka] = 1
        fa[kb] = np.where(side[kb] == -1, 0.5 * fa[kb], fa[kb])
        b[kb], fb[kb] = c[kb], fc[kb]
        side[kb] = -1
        active[r] = (np.abs(fcr) > tols[r]) & (np.abs(b[r] - a[r]) > 1e-15 * np.maximum(1.0, np.abs(a[r])))
    x = np.full(m, np.nan + 0j)
    y = np.full(m, np.nan + 0j)
    level = np.full(m, np.nan)
    sv = np.full(m, np.nan)
    xi, yi = _ray_xy(fam, th[idx], ph[idx], c)
    _, g = _inside(fam, n, xi, yi)
    good = np.abs(g - lev) <= BOUNDARY_TOL * np.maximum(1.0, np.abs(lev))
    x[idx], y[idx], level[idx], sv[idx] = xi, yi, lev, c
    ok[idx[~good]] = False
    return ok, x, y, level, sv


def boundary_samples(fam: Family, n: int, count: int, rng: np.random.Generator, with_params: bool = False):
    """``count`` points of the XY part of ``dK_n`` found by root finding along rays.

    Rays are straight lines in the plane of log-moduli starting at the family
    anchor; phases are random.  Returns ``(x, y, level)`` arrays, plus the
    ray parameters ``(theta, phases)`` when ``with_params`` is set.
    """
    out = [[] for _ in range(5)]
    tried = 0
    while len(out[0]) < count:
        if tried > 50 * count + 100:
            raise NotOnBoundary(f"could not locate boundary points of {fam.name} K_{n}")
        k = 2 * (count - len(out[0])) + 8
        tried += k
        th = rng.uniform(0, 2 * math.pi, k)
        ph = rng.random((k, 2))
        ok, x, y, lev, _ = _march(fam, n, th, ph)
        # rays that fail are retried in the opposite direction
        bad = np.nonzero(~ok)[0]
        if len(bad):
            ok2, x2, y2, lev2, _ = _march(fam, n, th[bad] + math.pi, ph[bad])
            th[bad] += math.pi
            ok[bad], x[bad], y[bad], lev[bad] = ok2, x2, y2, lev2
        for arr, v in zip(out, (x[ok], y[ok], lev[ok], th[ok], ph[ok])):
            arr.extend(v)
    x, y, lev, th, ph = (np.array(a[:count]) for a in out)
    x, y = x.astype(complex), y.astype(complex)
    if with_params:
        return x, y, lev.astype(float), th, ph.reshape(-1, 2)
    return x, y, lev.astype(float)


def _boundary_point(fam, n, th, ph, s_hint=None):
    th = np.array([th])
    ph = np.asarray(ph, dtype=float).reshape(1, 2)
    if s_hint is not None and s_hint > 0.1:
        ok, x, y, _, s = _march(fam, n, th, ph, s_hint - 0.1)
        if ok[0]:
            return complex(x[0]), complex(y[0]), float(s[0])
    ok, x, y, _, s = _march(fam, n, th, ph)
    return (complex(x[0]), complex(y[0]), float(s[0])) if ok[0] else None


def refine_indicator_min(indicator, fam: Family, n: int, th: float, ph, maxfev: int = 200):
    """Local minimum of ``|indicator|`` over ``dK_n`` near the ray ``(th, ph)``.

    Nelder-Mead over the ray angle and the two phases; each evaluation
    relocates the boundary point on the new ray.  Returns ``(value, (x, y))``.
    """

    hint = [None]

    def obj(v):
        p = _boundary_point(fam, n, v[0], v[1:], hint[0])
        if p is None:
            return 1e300
        hint[0] = p[2]
        return float(np.abs(indicator(np.array([p[0]]), np.array([p[1]]))[0]))

    v0 = np.array([th, *np.asarray(ph, dtype=float)])
    simplex = np.array([v0] + [v0 + 0.05 * e for e in np.eye(3)])
    res = minimize(obj, v0, method="Nelder-Mead",
                   options={"initial_simplex": simplex, "maxfev": maxfev, "xatol": 1e-9, "fatol": 1e-13})
    p = _boundary_point(fam, n, res.x[0], res.x[1:])
    return float(res.fun), (None if p is None else p[:2])


# ---------------------------------------------------------------- Wirtinger calculus


def wirtinger_gradient(g, p, step: float = 1e-5, relative: bool = True) -> np.ndarray:
    """Central-difference estimate of ``dg/dz_i = (dg/dx_i - i dg/dy_i)/2`` for real ``g``.

    ``g`` takes a complex vector.  With ``relative`` the step in each
    coordinate is scaled by ``max(|z_i|, 0.01)``.
    """
    if not (1e-7 <= step <= 1e-4):
        raise ValueError("step must lie in [1e-7, 1e-4]")
    p = np.asarray(p, dtype=complex)
    out = np.empty(len(p), dtype=complex)
    for i in range(len(p)):
        h = step * max(abs(p[i]), 0.01) if relative else step
        e = np.zeros(len(p), dtype=complex)
        e[i] = h
        dx = (g(p + e) - g(p - e)) / (2 * h)
        dy = (g(p + 1j * e) - g(p - 1j * e)) / (2 * h)
        out[i] = 0.5 * (dx - 1j * dy)
    return out


def eq215_indicator(lam, mu, q) -> complex:
    """``lam(1 - 2|x|^2 + |y|^2) + mu(1 - 2|y|^2 + |x|^2)`` at an XY point."""
    if isinstance(q, AffinePoint2):
        x, y = q.c1, q.c2
    else:
        x, y = q
    ax, ay = abs(x) ** 2, abs(y) ** 2
    return complex(lam) * (1 - 2 * ax + ay) + complex(mu) * (1 - 2 * ay + ax)


def _xy_of(p):
    if isinstance(p, ProjectivePoint):
        from .charts import to_affine

        q = to_affine(p, ChartId.XY)
        return q.c1, q.c2
    if isinstance(p, AffinePoint2):
        q = p if p.chart is ChartId.XY else chart_transition(p, ChartId.XY)
        return q.c1, q.c2
    return complex(p[0]), complex(p[1])


def _boundary_level(fam: Family, g: float, n: int | None, tol: float):
    if n is not None:
        cands = [n]
    else:
        k = fam.index_for_value(g) if np.isfinite(g) and g > 0 else None
        cands = [] if k is None else [k - 1, k, k + 1]
    for m in cands:
        if m < 1:
            continue
        for level in fam.levels(m):
            if np.isfinite(level) and abs(g - level) <= tol * max(1.0, abs(level)):
                return level
    raise NotOnBoundary(f"point is not on the boundary of any K_n of {fam.name} (g = {g!r})")


def transversality_indicator(F: LinearFoliation, fam: Family, p, n: int | None = None, method: str = "fd",
                             step: float = 1e-5, tol: float = BOUNDARY_TOL) -> complex:
    """``sum_i X_i dg/dz_i`` at a boundary point; nonzero exactly when ``dK_n`` is transversal there."""
    x, y = _xy_of(p)
    g = float(fam.g_xy(np.array([x]), np.array([y]))[0])
    _boundary_level(fam, g, n, tol)
    X = tangent_field(LinearFoliation(F.lam, F.mu), AffinePoint2(x, y))
    if np.all(X == 0):
        raise SingularPoint("the foliation is singular at this point")
    if method == "fd":
        grad = wirtinger_gradient(lambda z: float(fam.g_xy(z[:1], z[1:])[0]), [x, y], step)
    else:
        gx, gy = fam.grad_xy(np.array([x]), np.array([y]))
        grad = np.array([gx[0], gy[0]])
    return complex(X[0] * grad[0] + X[1] * grad[1])


def indicator_batch(F: LinearFoliation, fam: Family, x, y) -> np.ndarray:
    gx, gy = fam.grad_xy(x, y)
    return F.lam * np.asarray(x) * gx + F.mu * np.asarray(y) * gy


@dataclass(frozen=True)
class BoundaryReport:
    kind: BoundaryKind
    n_samples: int
    max_abs: float
    min_abs: float
    argmin: tuple
    indices: tuple
    n_refined: int = 0


def boundary_report(F: LinearFoliation, fam: Family, indices=None, n_samples: int = 500,
                    seed: int = 0, refine: int = 3) -> BoundaryReport:
    return boundary_report_for(lambda x, y: indicator_batch(F, fam, x, y), fam, indices, n_samples, seed, refine)


def boundary_report_for(indicator, fam: Family, indices=None, n_samples: int = 500,
                        seed: int = 0, refine: int = 3) -> BoundaryReport:
    """Boundary report for an arbitrary vectorized ``indicator(x, y)``.

    A nonvanishing sample minimum does not rule out tangencies on a thin set,
    so the ``refine`` smallest samples seed a local minimization of
    ``|indicator|`` along the boundary before the boundary is called
    transversal.
    """
    indices = tuple(indices or (fam.min_index, fam.min_index + 1, 2 * fam.min_index + 3))
    rng = np.random.default_rng(seed)
    per = [n_samples // len(indices) + (1 if i < n_samples % len(indices) else 0) for i in range(len(indices))]
    parts = []
    for n, c in zip(indices, per):
        x, y, _, th, ph = boundary_samples(fam, n, c, rng, with_params=True)
        parts.append((np.full(len(x), n), x, y, th, ph))
    ns, x, y, th = (np.concatenate([p[k] for p in parts]) for k in range(4))
    ph = np.concatenate([p[4] for p in parts])
    ind = np.abs(indicator(x, y))
    i = int(np.argmin(ind))
    mx, mn = float(np.max(ind)), float(ind[i])
    arg = (complex(x[i]), complex(y[i]))
    n_refined = 0
    if mx >= 1e-9 and mn > 1e-9:
        for j in np.argsort(ind)[:refine]:
            val, p = refine_indicator_min(indicator, fam, int(ns[j]), float(th[j]), ph[j])
            n_refined += 1
            if p is not None and val < mn:
                mn, arg = val, p
    if mx < 1e-9:
        kind = BoundaryKind.TANGENT
    elif mn > 1e-9:
        kind = BoundaryKind.TRANSVERSAL
    else:
        raise MixedBoundary(f"{fam.name}: |indicator| ranges over [{mn:.3g}, {mx:.3g}] (near {arg})")
    return BoundaryReport(kind, len(x), mx, mn, arg, indices, n_refined)


def boundary_kind(F: LinearFoliation, fam: Family, n_samples: int = 500, seed: int = 0) -> BoundaryKind:
    return boundary_report(F, fam, n_samples=n_samples, seed=seed).kind


# ---------------------------------------------------------------- the function f


def f_xy(x, y):
    return ProjectiveF().g_xy(x, y)


def maximize_f(start=(-1.0, 0.7)):
    """Maximize ``f`` over ``xy != 0`` by BFGS on ``-log f`` in log-moduli coordinates.

    ``-log f(e^p, e^q) = -2p - 2q + 3 log(1 + e^{2p} + e^{2q})`` is strictly convex.
    Returns ``((|x|, |y|), f_max, result)``.
    """

    def obj(v):
        p, q = v
        return -2 * p - 2 * q + 3 * np.logaddexp.reduce([0.0, 2 * p, 2 * q])

    def jac(v):
        p, q = v
        d = 1 + math.exp(2 * p) + math.exp(2 * q)
        return np.array([-2 + 6 * math.exp(2 * p) / d, -2 + 6 * math.exp(2 * q) / d])

    res = minimize(obj, np.asarray(start, dtype=float), jac=jac, method="BFGS", options={"gtol": 1e-13})
    loc = np.exp(res.x)
    return (float(loc[0]), float(loc[1])), float(math.exp(-res.fun)), res


def elimination_replay(alpha) -> dict:
    """Exact replay of the argument that the indicator only vanishes at ``|x| = |y| = 1``.

    With ``alpha = rho + i sigma``, ``sigma != 0``, and ``X = |x|^2``, ``Y = |y|^2``,
    vanishing of ``alpha(1-2X+Y) + (1-2Y+X)`` splits into ``sigma(1-2X+Y) = 0``
    and ``rho(1-2X+Y) + (1-2Y+X) = 0``; solving in exact rationals gives
    ``X = Y = 1``, where ``f = 1/27``.
    """
    alpha = complex(alpha)
    if alpha.imag == 0:
        raise ValueError("the elimination needs non-real alpha")
    # 1 - 2X + Y = 0 and 1 - 2Y + X = 0
    a11, a12, b1 = Fraction(-2), Fraction(1), Fraction(-1)
    a21, a22, b2 = Fraction(1), Fraction(-2), Fraction(-1)
    det = a11 * a22 - a12 * a21
    X = (b1 * a22 - a12 * b2) / det
    Y = (a11 * b2 - b1 * a21) / det
    f_val = X * Y / (1 + X + Y) ** 3
    return {"X": X, "Y": Y, "f": f_val, "modulus": (X, Y) == (1, 1), "f_is_1_27": f_val == Fraction(1, 27)}


# ---------------------------------------------------------------- grids and CSV


def eq215_abs_grid(lam, mu, res=200, top=2.0):
    from . import kernels

    ax = top * np.arange(1, res + 1) / res
    return ax, ax.copy(), np.abs(kernels.eq215_grid(lam, mu, ax, ax))


def write_csv(path, header, rows, meta: dict | None = None):
    """Write ``rows`` with a header; ``meta`` goes to ``<path>.meta.json``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    if meta is not None:
        Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def export_boundary_csv(path, F: LinearFoliation, fam: Family, n: int, count: int, seed: int = 0):
    x, y, level = boundary_samples(fam, n, count, np.random.default_rng(seed))
    ind = indicator_batch(F, fam, x, y)
    g = fam.g_xy(x, y)
    rows = [(x[i].real, x[i].imag, y[i].real, y[i].imag, g[i], ind[i].real, ind[i].imag, abs(ind[i]))
            for i in range(len(x))]
    header = ["x_re", "x_im", "y_re", "y_im", "g", "indicator_re", "indicator_im", "indicator_abs"]
    meta = {
        "columns": {
            "x_re": "real part of x (dimensionless)",
            "x_im": "imaginary part of x",
            "y_re": "real part of y",
            "y_im": "imaginary part of y",
            "g": "defining function value",
            "indicator_re": "real part of sum X_i dg/dz_i",
            "indicator_im": "imaginary part of sum X_i dg/dz_i",
            "indicator_abs": "modulus of the indicator",
        },
        "family": fam.name,
        "n": n,
        "seed": seed,
    }
    return write_csv(path, header, rows, meta)
