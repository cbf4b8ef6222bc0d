"""Linear foliations F_alpha of C^2 and their extensions G_alpha to CP^2.

A :class:`LinearFoliation` is given by ``(lam, mu)`` and is defined by the
1-form ``mu*y dx - lam*x dy``; its tangent field is ``(lam*x, mu*y)`` and
``alpha = lam/mu``.  On CP^2 the foliation is induced by the linear field
``diag(lam, mu, 0)`` on C^3, which is again diagonal in every standard chart:
the chart with numerator slots ``(i, j)`` and denominator slot ``d`` carries
the field with eigenvalues ``(e_i - e_d, e_j - e_d)`` where ``e = (lam, mu, 0)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .charts import CHART_SLOTS, AffinePoint2, ChartId, ProjectivePoint, to_affine
from .errors import ChartUndefined, DegenerateChartModel, InvalidFoliation, NotSingular

REAL_TOL = 1e-12


class Ambient(Enum):
    AFFINE2 = "affine"
    PROJECTIVE2 = "projective"


class SingularityType(Enum):
    POINCARE = "Poincare"
    SIEGEL = "Siegel"


@dataclass(frozen=True)
class LinearFoliation:
    lam: complex
    mu: complex
    ambient: Ambient = Ambient.AFFINE2

    def __post_init__(self):
        lam, mu = complex(self.lam), complex(self.mu)
        for v in (lam, mu):
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise InvalidFoliation(f"non-finite coefficient {v!r}")
        if lam == 0 or mu == 0:
            raise InvalidFoliation("lambda and mu must both be nonzero")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "ambient", Ambient(self.ambient))

    @classmethod
    def from_alpha(cls, alpha, ambient=Ambient.AFFINE2) -> "LinearFoliation":
        return cls(complex(alpha), 1.0, ambient)

    @property
    def alpha(self) -> complex:
        return self.lam / self.mu

    def scaled(self, c) -> "LinearFoliation":
        return LinearFoliation(c * self.lam, c * self.mu, self.ambient)

    def eigenvalues(self, chart: ChartId = ChartId.XY) -> tuple[complex, complex]:
        e = (self.lam, self.mu, 0j)
        (i, j), d = CHART_SLOTS[chart]
        return e[i] - e[d], e[j] - e[d]

    def __str__(self):
        name = "F" if self.ambient is Ambient.AFFINE2 else "G"
        return f"{name}_{_fmt(self.alpha)}"


def _fmt(z: complex) -> str:
    if z.imag == 0:
        return f"{z.real:g}"
    return f"({z.real:g}{z.imag:+g}i)"


def alpha(F: LinearFoliation) -> complex:
    return F.alpha


def is_alpha_one(F: LinearFoliation) -> bool:
    return abs(F.alpha - 1.0) <= REAL_TOL


def chart_model(G: LinearFoliation, chart: ChartId) -> LinearFoliation:
    """The linear foliation of C^2 that ``G`` restricts to in ``chart``.

    In the ``(lam, mu)`` normalization the models are ``F_alpha`` (XY),
    ``F_{1-alpha}`` (AB) and ``F_{(alpha-1)/alpha}`` (UV).
    """
    if chart is ChartId.XY:
        return LinearFoliation(G.lam, G.mu, Ambient.AFFINE2)
    if is_alpha_one(G):
        raise DegenerateChartModel("G_1 has no linear model with isolated singularity off the XY chart")
    e1, e2 = G.eigenvalues(chart)
    return LinearFoliation(e1, e2, Ambient.AFFINE2)


def tangent_field(F: LinearFoliation, q: AffinePoint2) -> np.ndarray:
    """Tangent vector of the foliation at ``q`` in ``q``'s chart."""
    if F.ambient is Ambient.AFFINE2 and q.chart is not ChartId.XY:
        raise ChartUndefined("affine foliations live in the XY chart only")
    if q.chart is not ChartId.XY and is_alpha_one(F):
        # the radial field vanishes on the line at infinity; divide by the b (or v) coordinate
        e1, e2 = F.eigenvalues(q.chart)
        return np.array([0.0, e2], dtype=complex)
    e1, e2 = F.eigenvalues(q.chart)
    return np.array([e1 * q.c1, e2 * q.c2], dtype=complex)


def tangent_field_batch(F: LinearFoliation, c1, c2, chart: ChartId = ChartId.XY):
    e1, e2 = F.eigenvalues(chart)
    return e1 * np.asarray(c1), e2 * np.asarray(c2)


def defining_form(F: LinearFoliation, q: AffinePoint2) -> np.ndarray:
    """Coefficients ``(P, Q)`` of ``mu y dx - lam x dy`` (or its chart model) at ``q``."""
    X = tangent_field(F, q)
    return np.array([X[1], -X[0]], dtype=complex)


def singular_set(F: LinearFoliation) -> list:
    if F.ambient is Ambient.AFFINE2:
        return [AffinePoint2(0, 0, ChartId.XY)]
    if is_alpha_one(F):
        return [ProjectivePoint(0, 0, 1)]
    return [ProjectivePoint(0, 0, 1), ProjectivePoint(0, 1, 0), ProjectivePoint(1, 0, 0)]


def is_transversal_to_infinity(F: LinearFoliation) -> bool:
    """True for G_1, whose leaves cross the line at infinity transversally."""
    return F.ambient is Ambient.PROJECTIVE2 and is_alpha_one(F)


_CHART_OF_POINT = {2: ChartId.XY, 1: ChartId.AB, 0: ChartId.UV}


def _singular_chart(F: LinearFoliation, p) -> ChartId:
    if isinstance(p, AffinePoint2):
        if p.chart is ChartId.XY and F.ambient is Ambient.AFFINE2:
            if abs(p.c1) <= REAL_TOL and abs(p.c2) <= REAL_TOL:
                return ChartId.XY
            raise NotSingular(f"{p!r} is not a singular point of {F}")
        from .charts import to_projective

        p = to_projective(p)
    for s in singular_set(F):
        if isinstance(s, AffinePoint2):
            continue
        if s == p:
            k = int(np.argmax(np.abs(s.coords)))
            return _CHART_OF_POINT[k]
    raise NotSingular(f"{p!r} is not a singular point of {F}")


def local_ratio(F: LinearFoliation, p) -> complex:
    """Eigenvalue ratio of the linear part at the singular point ``p``.

    At ``[0:0:1]`` this is ``alpha``, at ``[0:1:0]`` it is ``1 - alpha`` and at
    ``[1:0:0]`` it is ``1 - 1/alpha`` (first over second chart coordinate).
    """
    chart = _singular_chart(F, p)
    e1, e2 = F.eigenvalues(chart)
    return e1 / e2


def in_negative_reals(z: complex, tol: float = REAL_TOL) -> bool:
    return abs(z.imag) <= tol and z.real < -tol


def classify_singularity(F: LinearFoliation, p) -> SingularityType:
    r = local_ratio(F, p)
    return SingularityType.SIEGEL if in_negative_reals(r) else SingularityType.POINCARE


def near_real_boundary(z: complex, tol: float = REAL_TOL, band: float = 1e-9) -> bool:
    """``z`` is too close to the real axis to decide realness reliably."""
    return tol < abs(z.imag) <= band


def siegel_points(F: LinearFoliation) -> list:
    return [p for p in singular_set(F) if classify_singularity(F, p) is SingularityType.SIEGEL]


def separatrix_samples(F: LinearFoliation, p, n: int, rng: np.random.Generator) -> list:
    """Sample points on the two coordinate axes through the singular point ``p``.

    For a linear singularity these axes are the separatrices.  Points are
    returned as :class:`ProjectivePoint` (projective ambient) or
    :class:`AffinePoint2` (affine ambient).
    """
    chart = _singular_chart(F, p)
    out = []
    for k in range(n):
        r = math.exp(rng.uniform(math.log(0.05), math.log(20.0)))
        w = r * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        q = AffinePoint2(w, 0, chart) if k % 2 == 0 else AffinePoint2(0, w, chart)
        if F.ambient is Ambient.AFFINE2:
            out.append(q)
        else:
            from .charts import to_projective

            out.append(to_projective(q))
    return out


def to_chart_of(F: LinearFoliation, p: ProjectivePoint, chart: ChartId) -> AffinePoint2:
    return to_affine(p, chart)
