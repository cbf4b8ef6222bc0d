"""Points of C^2 and CP^2, the three standard affine charts, and reference metrics.

Homogeneous coordinates are ``[z0:z1:z2]``. The charts are

* ``XY``: ``x = z0/z2``, ``y = z1/z2``
* ``AB``: ``a = z0/z1``, ``b = z2/z1``
* ``UV``: ``u = z1/z0``, ``v = z2/z0``
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ChartUndefined

DENOM_CUTOFF = 1e-12
PHASE_TOL = 1e-10


class ChartId(Enum):
    XY = "XY"
    AB = "AB"
    UV = "UV"


# (numerator slots, denominator slot) in homogeneous coordinates
CHART_SLOTS = {
    ChartId.XY: ((0, 1), 2),
    ChartId.AB: ((0, 2), 1),
    ChartId.UV: ((1, 2), 0),
}


class ReferenceMetricId(Enum):
    EUCLIDEAN2 = "Euclidean2"
    FUBINI_STUDY = "FubiniStudy"


def _check_finite(*values):
    for v in values:
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"non-finite coordinate {v!r}")


@dataclass(frozen=True)
class AffinePoint2:
    c1: complex
    c2: complex
    chart: ChartId = ChartId.XY

    def __post_init__(self):
        object.__setattr__(self, "c1", complex(self.c1))
        object.__setattr__(self, "c2", complex(self.c2))
        _check_finite(self.c1, self.c2)

    @property
    def coords(self) -> np.ndarray:
        return np.array([self.c1, self.c2], dtype=complex)


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """A point of CP^2 stored as a unit vector of C^3.

    Equality is equality of complex lines: ``|<p, q>| = 1`` within 1e-10.
    """

    z0: complex
    z1: complex
    z2: complex

    def __post_init__(self):
        z = np.array([self.z0, self.z1, self.z2], dtype=complex)
        _check_finite(*z)
        norm = float(np.linalg.norm(z))
        if norm == 0.0:
            raise ValueError("(0, 0, 0) is not a point of CP^2")
        z = z / norm
        object.__setattr__(self, "z0", complex(z[0]))
        object.__setattr__(self, "z1", complex(z[1]))
        object.__setattr__(self, "z2", complex(z[2]))

    @property
    def coords(self) -> np.ndarray:
        return np.array([self.z0, self.z1, self.z2], dtype=complex)

    def __eq__(self, other):
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        return abs(abs(np.vdot(self.coords, other.coords)) - 1.0) <= PHASE_TOL

    def __hash__(self):
        # phase-invariant but coarse; equality does the real work
        return hash(tuple(round(abs(c), 6) for c in self.coords))

    def __repr__(self):
        return "ProjectivePoint[{:.6g}:{:.6g}:{:.6g}]".format(self.z0, self.z1, self.z2)


def to_affine(p: ProjectivePoint, chart: ChartId) -> AffinePoint2:
    (i, j), d = CHART_SLOTS[chart]
    z = p.coords
    if abs(z[d]) <= DENOM_CUTOFF:
        raise ChartUndefined(f"{p!r} is not in chart {chart.value}")
    return AffinePoint2(z[i] / z[d], z[j] / z[d], chart)


def to_projective(q: AffinePoint2) -> ProjectivePoint:
    (i, j), d = CHART_SLOTS[q.chart]
    z = [0j, 0j, 0j]
    z[i], z[j], z[d] = q.c1, q.c2, 1.0
    return ProjectivePoint(*z)


def homogeneous(q: AffinePoint2) -> np.ndarray:
    """Unnormalized homogeneous vector with a 1 in the chart's denominator slot."""
    (i, j), d = CHART_SLOTS[q.chart]
    z = np.zeros(3, dtype=complex)
    z[i], z[j], z[d] = q.c1, q.c2, 1.0
    return z


def chart_transition(q: AffinePoint2, to: ChartId) -> AffinePoint2:
    if q.chart is to:
        return q
    z = homogeneous(q)
    (i, j), d = CHART_SLOTS[to]
    if abs(z[d]) <= DENOM_CUTOFF * float(np.linalg.norm(z)):
        raise ChartUndefined(f"{q!r} is not in chart {to.value}")
    return AffinePoint2(z[i] / z[d], z[j] / z[d], to)


def chart_jacobian(q: AffinePoint2, to: ChartId) -> np.ndarray:
    """Holomorphic Jacobian ``J[k, m] = d(target_k)/d(source_m)`` at ``q``."""
    if q.chart is to:
        return np.eye(2, dtype=complex)
    z = homogeneous(q)
    (si, sj), _ = CHART_SLOTS[q.chart]
    (ti, tj), td = CHART_SLOTS[to]
    if abs(z[td]) <= DENOM_CUTOFF * float(np.linalg.norm(z)):
        raise ChartUndefined(f"{q!r} is not in chart {to.value}")
    # dZ_slot / d(source_m) is 1 exactly when the slot holds source coordinate m
    dz = np.zeros((3, 2), dtype=complex)
    dz[si, 0] = 1.0
    dz[sj, 1] = 1.0
    jac = np.empty((2, 2), dtype=complex)
    for k, slot in enumerate((ti, tj)):
        jac[k] = (dz[slot] * z[td] - z[slot] * dz[td]) / z[td] ** 2
    return jac


def push_vector(q: AffinePoint2, v, to: ChartId) -> tuple[AffinePoint2, np.ndarray]:
    """Express the tangent vector ``v`` at ``q`` in chart ``to``."""
    return chart_transition(q, to), chart_jacobian(q, to) @ np.asarray(v, dtype=complex)


def best_chart(p: ProjectivePoint) -> ChartId:
    """The chart whose denominator coordinate is largest in modulus."""
    k = int(np.argmax(np.abs(p.coords)))
    return {2: ChartId.XY, 1: ChartId.AB, 0: ChartId.UV}[k]


def fubini_study_matrix(z) -> np.ndarray:
    """Hermitian matrix ``G`` with ``g(v, v) = v^H G v`` in affine coordinates ``z``."""
    z = np.asarray(z, dtype=complex)
    s = 1.0 + float(np.vdot(z, z).real)
    return (s * np.eye(2) - np.outer(z, z.conj())) / s**2


def reference_matrix(metric: ReferenceMetricId, at: AffinePoint2) -> np.ndarray:
    if metric is ReferenceMetricId.EUCLIDEAN2:
        return np.eye(2, dtype=complex)
    return fubini_study_matrix(at.coords)


def reference_norm_sq(metric: ReferenceMetricId, at, v) -> float:
    """``g(v, v)`` for the Euclidean metric of C^2 or the Fubini-Study metric of CP^2.

    For Fubini-Study, ``at`` is an :class:`AffinePoint2` and ``v`` is expressed
    in that point's chart; a :class:`ProjectivePoint` is placed in its best chart
    and ``v`` is then read in that chart.
    """
    v = np.asarray(v, dtype=complex)
    if metric is ReferenceMetricId.EUCLIDEAN2:
        return float(np.vdot(v, v).real)
    if isinstance(at, ProjectivePoint):
        at = to_affine(at, best_chart(at))
    z = at.coords
    s = 1.0 + float(np.vdot(z, z).real)
    inner = np.vdot(z, v)  # sum v_i conj(z_i)
    return float((s * np.vdot(v, v).real - abs(inner) ** 2) / s**2)


def fubini_study_batch(x: np.ndarray, y: np.ndarray):
    """Entries ``(g11, g12, g22)`` of the Fubini-Study matrix at arrays of XY points."""
    s = 1.0 + np.abs(x) ** 2 + np.abs(y) ** 2
    g11 = (s - np.abs(x) ** 2) / s**2
    g22 = (s - np.abs(y) ** 2) / s**2
    g12 = -(x * np.conj(y)) / s**2
    return g11, g12, g22


def random_projective(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` points of CP^2 distributed by the Fubini-Study volume, as unit rows of C^3."""
    z = rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def unit_phase(theta: float) -> complex:
    return cmath.exp(1j * theta)
