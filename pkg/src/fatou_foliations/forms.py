"""Transverse 1-forms of the linear foliations and the metrics ``h = phi (x) conj(phi)``.

Every form is stored through its XY-chart coefficients ``(A, B)`` of
``A dx + B dy``; other charts are reached by pulling back along the chart
transition.  All forms below are written for the foliation defined by
``mu*y dx - lam*x dy`` whose leaves are tangent to ``(lam x, mu y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from . import kernels
from .charts import (
    AffinePoint2,
    ChartId,
    ReferenceMetricId,
    chart_jacobian,
    chart_transition,
    reference_matrix,
)
from .errors import ChartUndefined, EmptyRegion, FormSingular, HolonomyUndefined, InvalidForm

SING_CUTOFF = 1e-12
REAL_TOL = 1e-12

X_SYM, Y_SYM = sp.symbols("x y")


class Poly2:
    """A polynomial in ``x, y`` with complex coefficients, evaluated with numpy."""

    def __init__(self, expr):
        if isinstance(expr, Poly2):
            expr = expr.expr
        if isinstance(expr, str):
            expr = sp.sympify(expr, locals={"x": X_SYM, "y": Y_SYM, "I": sp.I})
        expr = sp.expand(sp.sympify(expr))
        extra = expr.free_symbols - {X_SYM, Y_SYM}
        if extra:
            raise InvalidForm(f"unexpected symbols {sorted(map(str, extra))}")
        self.expr = expr
        poly = sp.Poly(expr, X_SYM, Y_SYM)
        self.terms = tuple((int(i), int(j), complex(c)) for (i, j), c in poly.terms())

    def is_zero(self) -> bool:
        return self.expr == 0

    def degree(self) -> int:
        return max((i + j for i, j, _ in self.terms), default=0)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for i, j, c in self.terms:
            out = out + c * x**i * y**j
        return out

    def __eq__(self, other):
        return isinstance(other, Poly2) and sp.expand(self.expr - other.expr) == 0

    def __hash__(self):
        return hash(str(self.expr))

    def __repr__(self):
        return f"Poly2({self.expr})"


@dataclass(frozen=True)
class TransverseForm:
    """Base class; subclasses implement :meth:`coeffs` on XY-chart arrays."""

    def coeffs(self, x, y):
        raise NotImplementedError

    def singular_mask(self, x, y):
        raise NotImplementedError

    def chart_coeffs(self, q: AffinePoint2):
        """Coefficients at a point outside the XY chart, when the form extends there."""
        raise FormSingular(f"{self.name} is singular on the line at infinity")

    @property
    def name(self) -> str:
        return type(self).__name__


def _real_param(a, what):
    a = complex(a)
    if abs(a.imag) > REAL_TOL:
        raise InvalidForm(f"{what} needs real alpha, got {a}")
    return a.real


@dataclass(frozen=True)
class OmegaPrime(TransverseForm):
    """``(1/lam) dx/x - (1/mu) dy/y``."""

    lam: complex
    mu: complex

    def __post_init__(self):
        if complex(self.lam) == 0 or complex(self.mu) == 0:
            raise InvalidForm("lambda and mu must be nonzero")

    def coeffs(self, x, y):
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        return 1.0 / (complex(self.lam) * x), -1.0 / (complex(self.mu) * y)

    def singular_mask(self, x, y):
        return (np.abs(x) <= SING_CUTOFF) | (np.abs(y) <= SING_CUTOFF)


@dataclass(frozen=True)
class Eta(TransverseForm):
    """``(y dx - alpha x dy) / (|x|^{(alpha+1)/alpha} + |y|^{alpha+1})`` for ``alpha > 0``."""

    alpha: float

    def __post_init__(self):
        a = _real_param(self.alpha, "Eta")
        if a <= 0:
            raise InvalidForm("Eta needs alpha > 0")
        object.__setattr__(self, "alpha", a)

    def _den(self, x, y):
        a = self.alpha
        return np.abs(x) ** ((a + 1) / a) + np.abs(y) ** (a + 1)

    def coeffs(self, x, y):
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        d = self._den(x, y)
        return y / d, -self.alpha * x / d

    def singular_mask(self, x, y):
        return self._den(np.asarray(x), np.asarray(y)) <= SING_CUTOFF

    def chart_coeffs(self, q: AffinePoint2):
        # for alpha = 1 the form extends across the line at infinity:
        # in UV it is -(conj(v)/v) du/(1+|u|^2) and in AB (conj(b)/b) da/(1+|a|^2)
        if abs(self.alpha - 1.0) > REAL_TOL:
            return super().chart_coeffs(q)
        c1, c2 = q.c1, q.c2
        ph = 1.0 if c2 == 0 else (c2.conjugate() / c2)
        val = ph / (1.0 + abs(c1) ** 2)
        return (-val, 0j) if q.chart is ChartId.UV else (val, 0j)


@dataclass(frozen=True)
class Nu(TransverseForm):
    """``alpha dy/y - dx/x`` for ``alpha < 0``."""

    alpha: float

    def __post_init__(self):
        a = _real_param(self.alpha, "Nu")
        if a >= 0:
            raise InvalidForm("Nu needs alpha < 0")
        object.__setattr__(self, "alpha", a)

    def coeffs(self, x, y):
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        return -1.0 / x, self.alpha / y

    def singular_mask(self, x, y):
        return (np.abs(x) <= SING_CUTOFF) | (np.abs(y) <= SING_CUTOFF)


@dataclass(frozen=True)
class Gamma(TransverseForm):
    """``(y dx - alpha x dy) / (|y|^k (|y|^{alpha l} + |x|^l))`` with ``k + alpha l = 1 + alpha``."""

    alpha: float
    k: float
    l: float

    def __post_init__(self):
        a = _real_param(self.alpha, "Gamma")
        object.__setattr__(self, "alpha", a)
        if not gamma_constraint_check(a, self.k, self.l):
            raise InvalidForm(f"k + alpha l must equal 1 + alpha, got k={self.k}, l={self.l}, alpha={a}")

    def _den(self, x, y):
        ay = np.abs(y)
        return ay**self.k * (ay ** (self.alpha * self.l) + np.abs(x) ** self.l)

    def coeffs(self, x, y):
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        d = self._den(x, y)
        return y / d, -self.alpha * x / d

    def singular_mask(self, x, y):
        return (np.abs(np.asarray(y)) <= SING_CUTOFF) | (self._den(np.asarray(x), np.asarray(y)) <= SING_CUTOFF)


@dataclass(frozen=True)
class EtaPrime(TransverseForm):
    """``y dx + x dy``, invariant for ``alpha = -1``."""

    def coeffs(self, x, y):
        return np.asarray(y, dtype=complex) * 1.0, np.asarray(x, dtype=complex) * 1.0

    def singular_mask(self, x, y):
        return (np.abs(np.asarray(x)) <= SING_CUTOFF) & (np.abs(np.asarray(y)) <= SING_CUTOFF)


@dataclass(frozen=True)
class ConstantForm(TransverseForm):
    """``a dx + b dy``; generally not invariant, used as a control."""

    a: complex
    b: complex

    def coeffs(self, x, y):
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.full(shape, complex(self.a)), np.full(shape, complex(self.b))

    def singular_mask(self, x, y):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape, dtype=bool) | (
            self.a == 0 and self.b == 0
        )


@dataclass(frozen=True)
class MeromorphicClosed(TransverseForm):
    """``dx/Q + dy/P`` for the foliation ``P dx + Q dy = 0``."""

    P: Poly2 = field(hash=False)
    Q: Poly2 = field(hash=False)

    def __post_init__(self):
        P, Q = Poly2(self.P), Poly2(self.Q)
        if P.is_zero() or Q.is_zero():
            raise InvalidForm("P and Q must not vanish identically")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)

    def coeffs(self, x, y):
        return 1.0 / self.Q(x, y), 1.0 / self.P(x, y)

    def singular_mask(self, x, y):
        return (np.abs(self.P(x, y)) <= SING_CUTOFF) | (np.abs(self.Q(x, y)) <= SING_CUTOFF)

    def closedness_residual(self):
        """``d/dx(1/P) - d/dy(1/Q)`` as a simplified sympy expression."""
        P, Q = self.P.expr, self.Q.expr
        return sp.simplify(sp.diff(1 / P, X_SYM) - sp.diff(1 / Q, Y_SYM))

    def leaf_tangent(self, x, y):
        return -self.Q(x, y), self.P(x, y)


@dataclass(frozen=True)
class SwappedForm(TransverseForm):
    """Pullback of ``base`` by the exchange ``(x, y) -> (y, x)``."""

    base: TransverseForm

    def coeffs(self, x, y):
        a, b = self.base.coeffs(y, x)
        return b, a

    def singular_mask(self, x, y):
        return self.base.singular_mask(y, x)

    @property
    def name(self) -> str:
        return f"Swapped({self.base.name})"


def gamma_constraint_check(alpha, k, l) -> bool:
    return abs(k + alpha * l - 1.0 - alpha) <= 1e-12


def form_for_foliation_ok(phi: TransverseForm, lam, mu, x, y) -> np.ndarray:
    """``|phi(lam x, mu y)|``; zero when ``phi`` annihilates the leaves."""
    a, b = phi.coeffs(x, y)
    return np.abs(a * lam * np.asarray(x) + b * mu * np.asarray(y))


def eval_form(phi: TransverseForm, q: AffinePoint2) -> np.ndarray:
    """Coefficients of ``phi`` at ``q`` in ``q``'s chart."""
    if q.chart is ChartId.XY:
        x, y = q.c1, q.c2
        if bool(phi.singular_mask(np.array([x]), np.array([y]))[0]):
            raise FormSingular(f"{phi.name} is singular at {q}")
        a, b = phi.coeffs(np.array([x]), np.array([y]))
        return np.array([a[0], b[0]], dtype=complex)
    try:
        p = chart_transition(q, ChartId.XY)
        jac = chart_jacobian(q, ChartId.XY)
    except ChartUndefined:
        a, b = phi.chart_coeffs(q)
        return np.array([a, b], dtype=complex)
    return eval_form(phi, p) @ jac


def metric_norm_sq(phi: TransverseForm, q: AffinePoint2, v) -> float:
    return float(abs(eval_form(phi, q) @ np.asarray(v, dtype=complex)) ** 2)


def invariance_defect(phi: TransverseForm, hol, q: AffinePoint2, v) -> float:
    """``| |phi(d hol . v)|^2 at hol(q) - |phi(v)|^2 at q |`` for a holonomy germ ``hol``.

    Only the fiber component of ``v`` enters: the leaf direction is killed by
    ``phi`` at both ends, so ``v`` is first replaced by its projection to the
    source transversal along the leaf.
    """
    v = np.asarray(v, dtype=complex)
    k = hol.fiber_index()
    w = np.zeros(2, dtype=complex)
    w[k] = v[k]
    q1, w1 = hol.push(q, w)
    if q1 is None:
        raise HolonomyUndefined("holonomy not defined at q")
    return abs(metric_norm_sq(phi, q1, w1) - metric_norm_sq(phi, q, w))


def dual_norm_sq(phi: TransverseForm, x, y, metric: ReferenceMetricId) -> np.ndarray:
    """``sup |phi(v)|^2 / g(v, v)`` at XY points.

    Because ``phi`` kills the leaf tangent, this equals ``h(v, v)/g(v, v)`` for
    the g-unit vector ``v`` orthogonal to the leaf.
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    a, b = phi.coeffs(x, y)
    if metric is ReferenceMetricId.EUCLIDEAN2:
        return np.abs(a) ** 2 + np.abs(b) ** 2
    return kernels.dual_norm_fs(a, b, x, y)


def transverse_unit_vector(tangent, metric: ReferenceMetricId, at: AffinePoint2) -> np.ndarray:
    """g-unit vector g-orthogonal to ``tangent`` (Gram-Schmidt on the coordinate basis)."""
    G = reference_matrix(metric, at)
    X = np.asarray(tangent, dtype=complex)
    nX = float(np.real(np.vdot(X, G @ X)))
    if nX <= 0:
        raise FormSingular("leaf tangent vanishes")
    e = np.zeros(2, dtype=complex)
    e[int(np.argmin(np.abs(X)))] = 1.0
    v = e - (np.vdot(X, G @ e) / nX) * X
    return v / math.sqrt(float(np.real(np.vdot(v, G @ v))))


def transverse_ratio(phi: TransverseForm, q: AffinePoint2, metric: ReferenceMetricId, tangent) -> float:
    """``h(v, v)/g(v, v)`` on the g-orthogonal complement of ``tangent`` at ``q``."""
    v = transverse_unit_vector(tangent, metric, q)
    return metric_norm_sq(phi, q, v)


@dataclass(frozen=True)
class MetricSample:
    point: AffinePoint2
    transverse_vector: np.ndarray
    h_value: float
    g_value: float

    @property
    def ratio(self) -> float:
        return self.h_value / self.g_value


@dataclass(frozen=True)
class LowerBound:
    value: float
    n_samples: int
    witness: tuple
    metric: ReferenceMetricId

    def __float__(self):
        return self.value


def lower_bound_estimate(phi: TransverseForm, region, metric: ReferenceMetricId, n_samples: int) -> LowerBound:
    """Sampling estimate of ``inf h(v,v)/g(v,v)`` over g-unit transverse ``v``.

    ``region`` must provide ``sample_xy(n) -> (x, y)`` whose first ``n`` rows do
    not depend on the total count, so estimates over growing ``n_samples``
    are non-increasing.
    """
    x, y = region.sample_xy(n_samples)
    if len(x) == 0:
        raise EmptyRegion("sampler produced no points")
    ok = ~phi.singular_mask(x, y)
    x, y = x[ok], y[ok]
    if len(x) == 0:
        raise EmptyRegion("every sample is singular for the form")
    r = dual_norm_sq(phi, x, y, metric)
    i = int(np.argmin(r))
    return LowerBound(float(r[i]), int(len(x)), (complex(x[i]), complex(y[i])), metric)


def gamma_chart_norm(g: Gamma, q: AffinePoint2, v) -> float:
    """``|gamma(v)|`` at a point of the AB or UV chart, by the closed-form chart expression."""
    a, k, l = g.alpha, g.k, g.l
    v = np.asarray(v, dtype=complex)
    c1, c2 = q.c1, q.c2
    if q.chart is ChartId.UV:
        u, w = c1, c2
        num = abs(a * w * v[0] - (a - 1) * u * v[1])
        den = abs(u) ** k * abs(w) ** (3 - k - l) * (abs(u) ** (a * l) * abs(w) ** ((1 - a) * l) + 1)
    elif q.chart is ChartId.AB:
        aa, b = c1, c2
        num = abs((1 - a) * aa * v[1] - b * v[0])
        den = abs(b) ** (3 - k - l) * (abs(aa) ** l + abs(b) ** ((1 - a) * l))
    else:
        return math.sqrt(metric_norm_sq(g, q, v))
    if den <= SING_CUTOFF:
        raise FormSingular("gamma is singular here")
    return num / den
