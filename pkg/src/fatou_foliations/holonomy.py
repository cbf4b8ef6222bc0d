"""Leafwise integration and holonomy of linear foliations.

Leaves of ``mu*y dx - lam*x dy = 0`` are graphs over either coordinate away
from the axes: along a base path ``x(t)`` the fiber solves
``y'/y = (mu/lam) x'/x``, and along ``y(t)`` the fiber solves
``x'/x = (lam/mu) y'/y``.  The same holds in the AB and UV charts with the
chart eigenvalues in place of ``(lam, mu)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .charts import AffinePoint2, ChartId
from .errors import HolonomyUndefined, PathThroughSingularity, ToleranceNotMet
from .foliation import LinearFoliation, is_alpha_one

MAX_STEPS = 1_000_000


class BaseCoord(Enum):
    FIRST = "FirstCoord"
    SECOND = "SecondCoord"


class Axis(Enum):
    FIRST = "FirstAxis"
    SECOND = "SecondAxis"


@dataclass(frozen=True)
class Line:
    p0: complex
    p1: complex

    def at(self, t):
        return self.p0 + t * (self.p1 - self.p0)

    def row(self):
        return kernels.SEG_LINE, [self.p0.real, self.p0.imag, self.p1.real, self.p1.imag, 0.0, 0.0]


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    theta0: float
    theta1: float

    def at(self, t):
        th = self.theta0 + t * (self.theta1 - self.theta0)
        return self.center + self.radius * np.exp(1j * th)

    def row(self):
        c = complex(self.center)
        return kernels.SEG_ARC, [c.real, c.imag, float(self.radius), float(self.theta0), float(self.theta1), 0.0]


@dataclass(frozen=True)
class LeafPath:
    """A piecewise path in one base coordinate together with the starting fiber value."""

    base: BaseCoord
    segments: tuple
    fiber0: complex = 1.0
    chart: ChartId = ChartId.XY

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "fiber0", complex(self.fiber0))
        if not self.segments:
            raise HolonomyUndefined("a leaf path needs at least one segment")

    @property
    def start(self) -> complex:
        return complex(self.segments[0].at(0.0))

    @property
    def end(self) -> complex:
        return complex(self.segments[-1].at(1.0))

    def is_closed(self, tol=1e-12) -> bool:
        return abs(self.start - self.end) <= tol

    def reversed(self, fiber0=None) -> "LeafPath":
        segs = []
        for s in reversed(self.segments):
            if isinstance(s, Line):
                segs.append(Line(s.p1, s.p0))
            else:
                segs.append(Arc(s.center, s.radius, s.theta1, s.theta0))
        return LeafPath(self.base, segs, self.fiber0 if fiber0 is None else fiber0, self.chart)

    def then(self, other: "LeafPath") -> "LeafPath":
        return LeafPath(self.base, self.segments + other.segments, self.fiber0, self.chart)

    def sample(self, n_per_segment=64) -> np.ndarray:
        t = np.linspace(0.0, 1.0, n_per_segment)
        return np.concatenate([np.asarray(s.at(t), dtype=complex) for s in self.segments])

    def arrays(self):
        rows = [s.row() for s in self.segments]
        kinds = np.array([r[0] for r in rows], dtype=np.int64)
        params = np.array([r[1] for r in rows], dtype=float)
        return kinds, params


def circle_loop(radius=1.0, base=BaseCoord.FIRST, fiber0=1.0, turns=1, center=0j, chart=ChartId.XY) -> LeafPath:
    """Loop ``t -> center + radius e^{2 pi i turns t}`` starting at ``center + radius``."""
    return LeafPath(base, [Arc(center, radius, 0.0, 2 * math.pi * turns)], fiber0, chart)


def segment_path(p0, p1, base=BaseCoord.FIRST, fiber0=1.0, chart=ChartId.XY) -> LeafPath:
    return LeafPath(base, [Line(complex(p0), complex(p1))], fiber0, chart)


@dataclass(frozen=True)
class HolonomyResult:
    end_fiber: complex
    multiplier: complex
    integrator_error_estimate: float
    steps: int


def leaf_exponent(F: LinearFoliation, base: BaseCoord, chart: ChartId = ChartId.XY) -> complex:
    """``kappa`` with ``d(log fiber) = kappa d(log base)`` along leaves."""
    e1, e2 = F.eigenvalues(chart)
    if chart is not ChartId.XY and is_alpha_one(F):
        raise HolonomyUndefined("G_1 is not a linear foliation in this chart")
    return e2 / e1 if base is BaseCoord.FIRST else e1 / e2


def _check_path(path: LeafPath, floor=1e-9):
    pts = path.sample(256)
    if np.min(np.abs(pts)) <= floor:
        raise PathThroughSingularity("path passes through the base zero")


def integrate_leaf(F: LinearFoliation, path: LeafPath, tol: float = 1e-9) -> HolonomyResult:
    if not (1e-12 <= tol <= 1e-3):
        raise ValueError("tol must lie in [1e-12, 1e-3]")
    _check_path(path)
    kappa = leaf_exponent(F, path.base, path.chart)
    kinds, params = path.arrays()
    # integrate the normalized fiber (start 1): the ODE is linear, so it is also the variational solution
    m, err, steps, status = kernels.leaf_dopri(kinds, params, kappa, 1.0, tol, MAX_STEPS)
    if status == kernels.STATUS_SINGULAR:
        raise PathThroughSingularity("path passes through the base zero")
    if status != kernels.STATUS_OK:
        raise ToleranceNotMet(f"integrator stopped with status {status} after {steps} steps")
    return HolonomyResult(path.fiber0 * m, m, err, steps)


def log_increment(path: LeafPath, n_per_segment=4096) -> complex:
    """Continuous change of ``log(base)`` along the path."""
    total = 0j
    for s in path.segments:
        if isinstance(s, Arc) and s.center == 0:
            total += 1j * (s.theta1 - s.theta0)
            continue
        z = np.asarray(s.at(np.linspace(0.0, 1.0, n_per_segment)), dtype=complex)
        ang = np.unwrap(np.angle(z))
        total += math.log(abs(z[-1]) / abs(z[0])) + 1j * (ang[-1] - ang[0])
    return total


def closed_form_multiplier(F: LinearFoliation, path: LeafPath) -> complex:
    """Exact multiplier ``exp(kappa * Delta log(base))``; the oracle for :func:`integrate_leaf`."""
    return cmath.exp(leaf_exponent(F, path.base, path.chart) * log_increment(path))


def axis_multiplier(F: LinearFoliation, axis: Axis) -> complex:
    """Holonomy multiplier of one positive loop around a coordinate axis.

    ``SecondAxis``: loop in ``x`` around ``{x = 0}``, multiplier ``e^{2 pi i/alpha}``.
    ``FirstAxis``: loop in ``y`` around ``{y = 0}``, multiplier ``e^{2 pi i alpha}``.
    """
    a = F.alpha
    if axis is Axis.SECOND:
        return cmath.exp(2j * math.pi / a)
    return cmath.exp(2j * math.pi * a)


def axis_loop(axis: Axis, radius=1.0, fiber0=1.0) -> LeafPath:
    base = BaseCoord.FIRST if axis is Axis.SECOND else BaseCoord.SECOND
    return circle_loop(radius, base, fiber0)


def is_hyperbolic(m: complex, tol: float = 1e-6) -> bool:
    if not (0 < tol < 0.1):
        raise ValueError("tol must lie in (0, 0.1)")
    return abs(abs(m) - 1.0) > tol


@dataclass(frozen=True)
class HolonomyGerm:
    """Germ of the holonomy between the fibers over the path's endpoints.

    For linear foliations it is the linear map ``fiber -> derivative * fiber``.
    """

    base: BaseCoord
    base_from: complex
    base_to: complex
    derivative: complex
    chart: ChartId = ChartId.XY
    error: float = 0.0
    steps: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def _split(self, q: AffinePoint2):
        return (q.c1, q.c2) if self.base is BaseCoord.FIRST else (q.c2, q.c1)

    def _join(self, b, f):
        return AffinePoint2(b, f, self.chart) if self.base is BaseCoord.FIRST else AffinePoint2(f, b, self.chart)

    def __call__(self, q: AffinePoint2) -> AffinePoint2:
        b, f = self._split(q)
        if abs(b - self.base_from) > 1e-9 * max(1.0, abs(b)):
            raise HolonomyUndefined("point is not on the source transversal")
        return self._join(self.base_to, self.derivative * f)

    def fiber_index(self) -> int:
        return 1 if self.base is BaseCoord.FIRST else 0

    def push(self, q: AffinePoint2, v) -> tuple[AffinePoint2, np.ndarray]:
        """Image point and image of the fiber component of ``v``."""
        k = self.fiber_index()
        w = np.zeros(2, dtype=complex)
        w[k] = self.derivative * complex(np.asarray(v, dtype=complex)[k])
        return self(q), w

    def inverse(self) -> "HolonomyGerm":
        return HolonomyGerm(self.base, self.base_to, self.base_from, 1.0 / self.derivative, self.chart,
                            self.error, self.steps)

    def compose(self, other: "HolonomyGerm") -> "HolonomyGerm":
        """``other`` after ``self`` (self's target must be other's source)."""
        if other.base is not self.base or abs(other.base_from - self.base_to) > 1e-9:
            raise HolonomyUndefined("germs do not compose")
        return HolonomyGerm(self.base, self.base_from, other.base_to, self.derivative * other.derivative,
                            self.chart, self.error + other.error, self.steps + other.steps)


def holonomy_transport(F: LinearFoliation, start: AffinePoint2, path: LeafPath, tol: float = 1e-9,
                       to: AffinePoint2 | None = None) -> HolonomyGerm:
    """Transport the fiber of ``start`` along ``path``; returns the holonomy germ."""
    if start.chart is not path.chart:
        raise HolonomyUndefined("point and path are in different charts")
    b0 = start.c1 if path.base is BaseCoord.FIRST else start.c2
    if abs(b0 - path.start) > 1e-9 * max(1.0, abs(b0)):
        raise HolonomyUndefined("path does not start at the point's base coordinate")
    if to is not None:
        bt = to.c1 if path.base is BaseCoord.FIRST else to.c2
        if abs(bt - path.end) > 1e-9 * max(1.0, abs(bt)):
            raise HolonomyUndefined("path does not end at the target's base coordinate")
    if all(isinstance(s, Line) and s.p0 == s.p1 for s in path.segments):
        return HolonomyGerm(path.base, path.start, path.end, 1.0 + 0j, path.chart)
    res = integrate_leaf(F, path, tol)
    return HolonomyGerm(path.base, path.start, path.end, res.multiplier, path.chart, res.integrator_error_estimate,
                        res.steps)


def random_leaf_path(rng: np.random.Generator, base: BaseCoord, start: complex, n_segments=3,
                     chart=ChartId.XY) -> LeafPath:
    """A random piecewise path of arcs about 0 and radial segments, starting at ``start``."""
    segs = []
    z = complex(start)
    for _ in range(n_segments):
        if rng.random() < 0.5:
            dth = rng.uniform(-2 * math.pi, 2 * math.pi)
            th = cmath.phase(z)
            segs.append(Arc(0j, abs(z), th, th + dth))
            z = abs(z) * cmath.exp(1j * (th + dth))
        else:
            z1 = z * math.exp(rng.uniform(-0.7, 0.7))
            segs.append(Line(z, z1))
            z = z1
    return LeafPath(base, segs, 1.0, chart)
