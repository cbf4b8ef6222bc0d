"""Fatou-set certification for linear foliations and closed meromorphic forms.

A region U is certified to lie in the Fatou set when two kinds of evidence
are present: a transverse metric that is invariant under holonomy and
bounded from below on U, and a compact approximation of U.  Failing either
gives ``Inconclusive``; the criterion is sufficient only, so no verdict ever
places U in the Julia set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from . import approx
from .approx import BoundaryKind, Family
from .charts import AffinePoint2, ReferenceMetricId
from .errors import (
    AmbientMismatch,
    FatouError,
    InvalidFoliation,
    MixedBoundary,
    NotClosed,
    UnclassifiedAlpha,
)
from .foliation import Ambient, LinearFoliation, separatrix_samples, siegel_points
from .forms import (
    X_SYM,
    Y_SYM,
    EtaPrime,
    MeromorphicClosed,
    Poly2,
    TransverseForm,
    dual_norm_sq,
    invariance_defect,
    lower_bound_estimate,
    metric_norm_sq,
)
from .holonomy import Axis, BaseCoord, axis_loop, axis_multiplier, holonomy_transport, integrate_leaf, \
    is_hyperbolic, random_leaf_path
from .regions import RegionKind, RegionSpec

REAL_TOL = 1e-12
BRANCH_BAND = 1e-9


@dataclass(frozen=True)
class CheckParams:
    n_holonomy: int = 50
    invariance_tol: float = 1e-6
    holonomy_tol: float = 1e-10
    c_min: float = 1e-6
    n_lower: int = 2000
    refine_factor: int = 4
    reach_factor: float = 10.0
    stability: float = 0.10
    n_boundary: int = 500
    n_nesting: int = 300
    n_union: int = 1000
    closed_tol: float = 1e-9
    seed: int = 0

    def as_dict(self):
        return dict(self.__dict__)


# ---------------------------------------------------------------- verdicts


@dataclass
class FatouSubset:
    region: str
    evidence: dict = field(default_factory=dict)
    kind: str = "FatouSubset"

    def as_dict(self):
        return {"verdict": self.kind, "region": self.region, "evidence": self.evidence}


@dataclass
class Inconclusive:
    failed: list
    evidence: dict = field(default_factory=dict)
    kind: str = "Inconclusive"

    def as_dict(self):
        return {"verdict": self.kind, "failed": list(self.failed), "evidence": self.evidence}


@dataclass
class KnownJuliaIntersection:
    witness: object
    kind: str = "KnownJuliaIntersection"

    def as_dict(self):
        return {"verdict": self.kind, "witness": _jsonable(self.witness)}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    return v


# ---------------------------------------------------------------- hypothesis 1


def _reference_metric(ambient: Ambient) -> ReferenceMetricId:
    return ReferenceMetricId.FUBINI_STUDY if ambient is Ambient.PROJECTIVE2 else ReferenceMetricId.EUCLIDEAN2


def invariance_evidence(F: LinearFoliation, U: RegionSpec, phi: TransverseForm, n: int, tol: float,
                        hol_tol: float = 1e-10, seed: int = 0) -> dict:
    """Relative invariance defects of ``|phi|^2`` over ``n`` random holonomy transports in the XY chart."""
    rng = np.random.default_rng(seed)
    x, y = U.with_seed(seed).sample_xy(4 * n)
    ok = ~phi.singular_mask(x, y) & (np.maximum(np.abs(x), np.abs(y)) > 1e-6)
    x, y = x[ok], y[ok]
    Fa = LinearFoliation(F.lam, F.mu)
    worst, count = 0.0, 0
    for i in range(min(n, len(x))):
        q = AffinePoint2(x[i], y[i])
        base = BaseCoord.FIRST if abs(x[i]) >= abs(y[i]) else BaseCoord.SECOND
        b0 = x[i] if base is BaseCoord.FIRST else y[i]
        path = random_leaf_path(rng, base, b0, n_segments=3)
        germ = holonomy_transport(Fa, q, path, hol_tol)
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v = v / np.linalg.norm(v)
        w = np.zeros(2, dtype=complex)
        w[germ.fiber_index()] = v[germ.fiber_index()]
        ref = metric_norm_sq(phi, q, w)
        d = invariance_defect(phi, germ, q, v) / max(ref, 1e-300)
        worst = max(worst, d)
        count += 1
    return {"n_transports": count, "max_relative_defect": worst, "tolerance": tol,
            "passed": bool(count > 0 and worst < tol)}


def lower_bound_evidence(phi: TransverseForm, U: RegionSpec, params: CheckParams) -> dict:
    """Estimate at ``(reach, N)`` and at the refinement ``(reach/10, 4N)``."""
    metric = _reference_metric(U.ambient)
    e1 = lower_bound_estimate(phi, U, metric, params.n_lower)
    U2 = U.with_reach(U.reach / params.reach_factor)
    e2 = lower_bound_estimate(phi, U2, metric, params.refine_factor * params.n_lower)
    rel = abs(e2.value - e1.value) / max(e1.value, 1e-300)
    return {
        "metric": metric.value,
        "estimate": e1.value,
        "refined_estimate": e2.value,
        "relative_change": rel,
        "witness": e2.witness,
        "c_min": params.c_min,
        "stable": bool(rel < params.stability),
        "passed": bool(rel < params.stability and e2.value >= params.c_min),
    }


# ---------------------------------------------------------------- hypothesis 2


def family_evidence(fam: Family, U: RegionSpec, params: CheckParams, indicator=None,
                    F: LinearFoliation | None = None) -> dict:
    n0 = fam.min_index
    nest = approx.nesting_check(fam, n0, params.n_nesting, params.seed)
    try:
        if indicator is None:
            rep = approx.boundary_report(F, fam, n_samples=params.n_boundary, seed=params.seed)
        else:
            rep = approx.boundary_report_for(indicator, fam, n_samples=params.n_boundary, seed=params.seed)
        kind, bmin, bmax = rep.kind.value, rep.min_abs, rep.max_abs
    except (MixedBoundary, FatouError) as exc:
        kind, bmin, bmax = f"failed: {exc}", None, None
    cert = fam.certificate
    if kind == BoundaryKind.TRANSVERSAL.value:
        bok = True
    elif kind == BoundaryKind.TANGENT.value:
        # a saturated boundary needs a generation certificate for the restricted foliation
        bok = cert.kind != "Compact"
    else:
        bok = False
    uok, worst = approx.union_check(fam, U, params.n_union)
    return {
        "family": fam.name,
        "min_index": n0,
        "nesting": bool(nest),
        "boundary_kind": kind,
        "boundary_min_abs": bmin,
        "boundary_max_abs": bmax,
        "certificate": cert.as_dict(),
        "boundary_ok": bool(bok),
        "union": bool(uok),
        "union_max_index": worst,
        "passed": bool(nest and bok and uok),
    }


def _check_ambient(F_ambient: Ambient, U: RegionSpec, fam: Family):
    if U.ambient is not F_ambient:
        raise AmbientMismatch(f"region is {U.ambient.value}, foliation is {F_ambient.value}")
    if fam.ambient is not U.ambient:
        raise AmbientMismatch(f"family {fam.name} lives in {fam.ambient.value}, region in {U.ambient.value}")


def _verdict(U: RegionSpec, blocks: dict, params: CheckParams):
    failed = [k for k, b in blocks.items() if isinstance(b, dict) and not b.get("passed", False)]
    evidence = _jsonable({**blocks, "tolerances": params.as_dict()})
    if failed:
        return Inconclusive(failed, evidence)
    return FatouSubset(f"{U.ambient.value}:{U.description}" + (":swapped" if U.swap else ""), evidence)


def check_thm26(F: LinearFoliation, U: RegionSpec, phi: TransverseForm, fam: Family,
                params: CheckParams | None = None):
    """``FatouSubset`` when both hypotheses hold on U, otherwise ``Inconclusive`` naming the failures."""
    params = params or CheckParams()
    _check_ambient(F.ambient, U, fam)
    blocks = {
        "invariance": invariance_evidence(F, U, phi, params.n_holonomy, params.invariance_tol,
                                          params.holonomy_tol, params.seed),
        "lower_bound": lower_bound_evidence(phi, U, params),
        "compact_approximation": family_evidence(fam, U, params, F=F),
    }
    return _verdict(U, blocks, params)


# ---------------------------------------------------------------- known answers


@dataclass(frozen=True)
class FatouJuliaDescription:
    alpha: complex
    ambient: Ambient
    fatou: RegionSpec
    julia: str
    source: str
    note: str = ""
    confidence: str = "stated"

    def as_dict(self):
        return {
            "alpha": [self.alpha.real, self.alpha.imag],
            "ambient": self.ambient.value,
            "fatou": self.fatou.description + (" (z0 and z1 exchanged)" if self.fatou.swap else ""),
            "julia": self.julia,
            "source": self.source,
            "note": self.note,
            "confidence": self.confidence,
        }


def known_classification(alpha, ambient) -> FatouJuliaDescription:
    """Known Fatou set of ``F_alpha`` (affine) or ``G_alpha`` (projective)."""
    a = complex(alpha)
    amb = Ambient(ambient) if not isinstance(ambient, Ambient) else ambient
    if a == 0:
        raise InvalidFoliation("alpha must be nonzero")
    if REAL_TOL < abs(a.imag) <= BRANCH_BAND:
        raise UnclassifiedAlpha(f"alpha = {a} is too close to the real axis to classify")
    real = abs(a.imag) <= REAL_TOL
    r = a.real
    if real and (abs(r) <= BRANCH_BAND or REAL_TOL < abs(r - 1) <= BRANCH_BAND):
        raise UnclassifiedAlpha(f"alpha = {a} lies on a branch boundary")
    R = lambda kind, **kw: RegionSpec(amb, kind, **kw)  # noqa: E731
    if amb is Ambient.AFFINE2:
        if not real:
            return FatouJuliaDescription(a, amb, R(RegionKind.COMPLEMENT_OF_AXES, label="{xy != 0}"),
                                         "the two axes {xy = 0}",
                                         "known answer for non-real alpha, stated without proof",
                                         confidence="lower")
        if r > 0:
            return FatouJuliaDescription(a, amb, R(RegionKind.COMPLEMENT_OF_ORIGIN, label="C^2 minus the origin"),
                                         "the origin", "Poincare-type linear singularity")
        return FatouJuliaDescription(a, amb, R(RegionKind.COMPLEMENT_OF_AXES, label="{xy != 0}"),
                                     "the two axes {xy = 0}", "Siegel-type linear singularity")
    if not real:
        return FatouJuliaDescription(a, amb, R(RegionKind.COMPLEMENT_OF_COORD_TRIANGLE, label="{z0 z1 z2 != 0}"),
                                     "the coordinate triangle {z0 z1 z2 = 0}",
                                     "hyperbolic holonomy along the three invariant lines")
    if abs(r - 1) <= REAL_TOL:
        return FatouJuliaDescription(a, amb, R(RegionKind.COMPLEMENT_OF_POINT, label="CP^2 minus [0:0:1]"),
                                     "the point [0:0:1]", "G_1 is transversal to the line at infinity")
    if 0 < r < 1:
        return FatouJuliaDescription(a, amb, R(RegionKind.COMPLEMENT_OF_TWO_LINES, label="{z1 z2 != 0}"),
                                     "the lines {z1 = 0} and {z2 = 0}",
                                     "Siegel point [1:0:0]; its separatrices lie in the Julia set")
    if r > 1:
        return FatouJuliaDescription(a, amb, R(RegionKind.COMPLEMENT_OF_TWO_LINES, swap=True, label="{z0 z2 != 0}"),
                                     "the lines {z0 = 0} and {z2 = 0}",
                                     "Siegel point [0:1:0]; its separatrices lie in the Julia set",
                                     note=f"reduced to alpha = {1 / r:.12g} by exchanging z0 and z1")
    return FatouJuliaDescription(a, amb, R(RegionKind.COMPLEMENT_OF_AXES, label="{z0 z1 != 0}"),
                                 "the lines {z0 = 0} and {z1 = 0}",
                                 "Siegel point [0:0:1]; the other two singular points are of Poincare type")


def julia_witnesses(F: LinearFoliation, n: int = 20, seed: int = 0) -> np.ndarray:
    """Homogeneous points on separatrices of Siegel-type singular points (known Julia points)."""
    rng = np.random.default_rng(seed)
    out = []
    for p in siegel_points(F):
        for w in separatrix_samples(F, p, n, rng):
            if F.ambient is Ambient.PROJECTIVE2:
                out.append(w.coords)
            else:
                out.append(np.array([w.c1, w.c2, 1.0], dtype=complex))
    return np.array(out, dtype=complex).reshape(-1, 3)


def excludes_witnesses(U: RegionSpec, witnesses) -> bool:
    w = np.atleast_2d(np.asarray(witnesses, dtype=complex))
    if len(w) == 0:
        return True
    return not bool(np.any(U.contains_homogeneous(w)))


def region_within(U: RegionSpec, V: RegionSpec, n: int = 2000) -> bool:
    """Sampled inclusion of U in V."""
    x, y = U.sample_xy(n)
    if U.ambient is Ambient.AFFINE2:
        return bool(np.all(V.contains_xy(x, y)))
    z = np.stack([x, y, np.ones_like(x)], axis=1)
    return bool(np.all(V.contains_homogeneous(z)))


# ---------------------------------------------------------------- closed meromorphic forms


def _linear_coeffs(P: Poly2, Q: Poly2):
    """``(lam, mu)`` when ``P = mu y`` and ``Q = -lam x``, else ``None``."""
    tp, tq = dict(((i, j), c) for i, j, c in P.terms), dict(((i, j), c) for i, j, c in Q.terms)
    if set(tp) == {(0, 1)} and set(tq) == {(1, 0)}:
        return -tq[(1, 0)], tp[(0, 1)]
    return None


def closedness(phi: MeromorphicClosed, tol: float = 1e-9, n_grid: int = 21) -> dict:
    """Symbolic check of ``d/dx(1/P) = d/dy(1/Q)``; a numeric grid decides when simplification does not."""
    expr = phi.closedness_residual()
    if expr == 0:
        return {"closed": True, "method": "symbolic", "residual": 0.0, "symbolic": "0"}
    f = sp.lambdify((X_SYM, Y_SYM), expr, "numpy")
    t = np.linspace(-2.0, 2.0, n_grid) + 0.123
    X, Y = np.meshgrid(t + 0.31j, t - 0.17j)
    with np.errstate(all="ignore"):
        vals = np.asarray(f(X, Y), dtype=complex) * np.ones_like(X)
    keep = ~phi.singular_mask(X, Y) & np.isfinite(vals)
    i = int(np.argmax(np.where(keep, np.abs(vals), -1.0)))
    worst = float(np.abs(vals.flat[i]))
    point = (complex(X.flat[i]), complex(Y.flat[i]))
    return {"closed": worst < tol, "method": "numeric", "residual": worst, "point": point, "symbolic": str(expr)}


def check_thm212(P, Q, fam: Family, ambient=Ambient.AFFINE2, params: CheckParams | None = None):
    """Fatou certification from a closed meromorphic form ``dx/Q + dy/P`` of ``P dx + Q dy = 0``.

    Raises :class:`NotClosed` with a residual witness when the form is not closed.
    """
    params = params or CheckParams()
    amb = Ambient(ambient) if not isinstance(ambient, Ambient) else ambient
    phi = MeromorphicClosed(Poly2(P), Poly2(Q))
    cl = closedness(phi, params.closed_tol)
    if not cl["closed"]:
        raise NotClosed(f"d(dx/Q + dy/P) = {cl['symbolic']} does not vanish", residual=cl["residual"],
                        point=cl.get("point"), symbolic=cl["symbolic"])
    pole = sp.factor(phi.P.expr * phi.Q.expr)
    head = {"closedness": {**cl, "passed": True},
            "zeros": {"passed": True, "note": "coefficients 1/Q and 1/P never vanish"},
            "pole_set": f"{{{pole} = 0}}" if phi.P.degree() + phi.Q.degree() > 0 else "empty"}
    lin = _linear_coeffs(phi.P, phi.Q)
    if lin is not None:
        F = LinearFoliation(lin[0], lin[1], amb)
        U = RegionSpec(amb, RegionKind.COMPLEMENT_OF_AXES, label="complement of the pole set {xy = 0}")
        v = check_thm26(F, U, phi, fam, params)
        v.evidence = _jsonable({**head, **v.evidence})
        return v
    if amb is not Ambient.AFFINE2 or fam.ambient is not Ambient.AFFINE2:
        raise AmbientMismatch("non-linear forms are handled in the affine chart only")
    if phi.P.degree() == 0 and phi.Q.degree() == 0:
        U = RegionSpec(amb, RegionKind.WHOLE, label="C^2")
    else:
        U = RegionSpec(amb, RegionKind.CUSTOM, label="complement of the pole set",
                       predicate=lambda x, y: ~phi.singular_mask(x, y))
    x, y = U.sample_xy(500)
    tx, ty = phi.leaf_tangent(x, y)
    a, b = phi.coeffs(x, y)
    kill = float(np.max(np.abs(a * tx + b * ty))) if len(x) else 0.0
    blocks = {
        **head,
        "invariance": {"passed": bool(kill < params.invariance_tol), "max_abs_form_on_leaf": kill,
                       "note": "a closed form defining the foliation has holonomy-invariant modulus"},
        "lower_bound": lower_bound_evidence(phi, U, params),
        "compact_approximation": family_evidence(
            fam, U, params,
            indicator=lambda x, y: _field_indicator(phi, fam, x, y)),
    }
    return _verdict(U, blocks, params)


def _field_indicator(phi: MeromorphicClosed, fam: Family, x, y):
    tx, ty = phi.leaf_tangent(x, y)
    gx, gy = fam.grad_xy(x, y)
    return tx * gx + ty * gy


# ---------------------------------------------------------------- counterexamples


def eta_prime_decay(reaches=(1e-1, 1e-2, 1e-3, 1e-4, 1e-5), n: int = 2000, seed: int = 0) -> list:
    """Lower-bound estimates of ``|y dx + x dy|^2`` on ``{y != 0}`` as the sampling reach shrinks."""
    U = RegionSpec(Ambient.AFFINE2, RegionKind.HALF_SPACE_Y_NONZERO, seed=seed)
    rows = []
    for r in reaches:
        e = lower_bound_estimate(EtaPrime(), U.with_reach(r), ReferenceMetricId.EUCLIDEAN2, n)
        rows.append({"reach": r, "estimate": e.value, "witness": e.witness})
    return rows


def counterexample_suite(seed: int = 0) -> dict:
    """Three cases where one hypothesis fails."""
    F = LinearFoliation.from_alpha(1j)
    res = integrate_leaf(F, axis_loop(Axis.FIRST), tol=1e-10)
    m = res.multiplier
    closed = axis_multiplier(F, Axis.FIRST)
    decay = eta_prime_decay(seed=seed)
    x, y = 1.0, 1e-3
    ratio_dx = abs(EtaPrime().coeffs(np.array([x]), np.array([y]))[0][0]) ** 2
    ratio_dual = float(dual_norm_sq(EtaPrime(), np.array([1e-3]), np.array([1e-3]), ReferenceMetricId.EUCLIDEAN2)[0])
    return _jsonable({
        "no_invariant_metric": {
            "alpha": 1j,
            "axis": Axis.FIRST.value,
            "multiplier": m,
            "multiplier_abs": abs(m),
            "closed_form": closed,
            "closed_form_abs": math.exp(-2 * math.pi),
            "relative_error": abs(m - closed) / abs(closed),
            "is_hyperbolic": is_hyperbolic(m),
            "note": "contracting-repelling holonomy along an invariant axis rules out an invariant metric",
        },
        "no_compact_approximation": {
            "alpha": -1.0,
            "region": "C^2 minus the origin",
            "metric": "|y dx + x dy|^2 (invariant)",
            "reason": "a compact approximation would make the restricted foliation compactly generated, "
                      "and it cannot contain the x-axis and the y-axis at the same time",
        },
        "not_bounded_below": {
            "alpha": -1.0,
            "region": "{y != 0}",
            "metric": "|y dx + x dy|^2",
            "decay": decay,
            "ratio_dx_at_1_1e-3": ratio_dx,
            "dual_norm_at_1e-3_1e-3": ratio_dual,
        },
    })


# ---------------------------------------------------------------- documented tuples


def documented_cases():
    """The documented (foliation, region, form, family) tuples and the expected verdicts."""
    from .approx import AffineConeG1, AnnulusNormSq, AnnulusProduct, HalfSpaceX, ProjectiveF, WeightedCone
    from .forms import Eta, Gamma, Nu, OmegaPrime, SwappedForm

    P, A = Ambient.PROJECTIVE2, Ambient.AFFINE2
    cases = []

    def add(cid, alpha, amb, kind, phi, fam, expected, **kw):
        F = LinearFoliation.from_alpha(alpha, amb)
        U = RegionSpec(amb, kind, **kw)
        cases.append((cid, F, U, phi, fam, expected))

    add("G_i/coord-triangle", 1j, P, RegionKind.COMPLEMENT_OF_COORD_TRIANGLE, OmegaPrime(1j, 1.0),
        ProjectiveF(), "FatouSubset")
    add("F_1/2/origin", 0.5, A, RegionKind.COMPLEMENT_OF_ORIGIN, Eta(0.5), AnnulusNormSq(), "FatouSubset")
    add("F_-1/axes", -1.0, A, RegionKind.COMPLEMENT_OF_AXES, Nu(-1.0), AnnulusProduct(), "FatouSubset")
    add("G_1/2/two-lines", 0.5, P, RegionKind.COMPLEMENT_OF_TWO_LINES, Gamma(0.5, 1.0, 1.0),
        WeightedCone(0.5), "FatouSubset")
    add("G_1/point", 1.0, P, RegionKind.COMPLEMENT_OF_POINT, Eta(1.0), AffineConeG1(), "FatouSubset")
    add("G_2/two-lines-swapped", 2.0, P, RegionKind.COMPLEMENT_OF_TWO_LINES, SwappedForm(Gamma(0.5, 1.0, 1.0)),
        WeightedCone(0.5, swap=True), "FatouSubset", swap=True)
    add("F_-1/half-space", -1.0, A, RegionKind.HALF_SPACE_Y_NONZERO, EtaPrime(), HalfSpaceX(), "Inconclusive")
    return cases
