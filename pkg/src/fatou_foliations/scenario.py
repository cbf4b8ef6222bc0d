"""Declarative scenarios: strict YAML parsing, execution and deterministic reports."""

from __future__ import annotations

import json
import math
import multiprocessing as mp
import time
from dataclasses import dataclass, field, replace
from importlib import resources
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from . import approx, forms
from .errors import ConfigError, FatouError, InvalidFoliation, NotClosed
from .foliation import Ambient, LinearFoliation
from .regions import RegionKind, RegionSpec

SCHEMA_VERSION = 1
DEFAULT_TIMEOUT = 60.0

# ---------------------------------------------------------------- schema

_NUM = {"type": ["number", "string"]}
_COMPLEX = {"oneOf": [_NUM, {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}
_STRICT = {"additionalProperties": False}

_FOLIATION = {"type": "object", **_STRICT, "required": ["lambda", "mu", "ambient"],
              "properties": {"lambda": _COMPLEX, "mu": _COMPLEX, "ambient": {"enum": ["affine", "projective"]}}}
_REGION = {"type": "object", **_STRICT, "required": ["kind"],
           "properties": {"kind": {"enum": [k.value for k in RegionKind if k is not RegionKind.CUSTOM]},
                          "reach": {"type": "number", "exclusiveMinimum": 0},
                          "radius": {"type": "number", "exclusiveMinimum": 0},
                          "swap": {"type": "boolean"}}}
_FORM = {"type": "object", **_STRICT, "required": ["type"],
         "properties": {"type": {"enum": ["OmegaPrime", "Eta", "Nu", "Gamma", "EtaPrime", "ConstantForm"]},
                        "lambda": _COMPLEX, "mu": _COMPLEX, "alpha": _COMPLEX, "k": {"type": "number"},
                        "l": {"type": "number"}, "a": _COMPLEX, "b": _COMPLEX, "swap": {"type": "boolean"}}}
_FAMILY = {"type": "object", **_STRICT, "required": ["type"],
           "properties": {"type": {"enum": sorted(approx.FAMILIES)}, "alpha": {"type": "number"},
                          "swap": {"type": "boolean"}, "a": _COMPLEX, "b": _COMPLEX}}
_TOLERANCES = {"type": "object", **_STRICT,
               "properties": {"invariance": {"type": "number"}, "c_min": {"type": "number"},
                              "closedness": {"type": "number"}, "holonomy": {"type": "number"},
                              "stability": {"type": "number"}}}
_SAMPLES = {"type": "object", **_STRICT,
            "properties": {"n_holonomy": {"type": "integer", "minimum": 1},
                           "n_lower": {"type": "integer", "minimum": 10},
                           "n_boundary": {"type": "integer", "minimum": 3},
                           "n_nesting": {"type": "integer", "minimum": 1},
                           "n_union": {"type": "integer", "minimum": 1}}}
_DISC = {"type": "object", **_STRICT, "required": ["center", "radius"],
         "properties": {"center": _COMPLEX, "radius": {"type": "number", "exclusiveMinimum": 0}}}
_GENERATOR = {"type": "object", **_STRICT, "required": ["id", "map", "domain", "extension"],
              "properties": {"id": {"type": "string"},
                             "map": {"type": "object", **_STRICT,
                                     "properties": {"a": _COMPLEX, "b": _COMPLEX, "c": _COMPLEX, "d": _COMPLEX}},
                             "domain": _DISC, "extension": _DISC}}

_COMMON = {"id": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"}, "description": {"type": "string"},
           "source": {"type": "string"}, "seed": {"type": "integer", "minimum": 0},
           "timeout": {"type": "number", "exclusiveMinimum": 0}}

SCENARIO_SCHEMAS = {
    "thm26": {"required": ["id", "kind", "foliation", "region", "form", "family", "expected"],
              "properties": {"foliation": _FOLIATION, "region": _REGION, "form": _FORM, "family": _FAMILY,
                             "tolerances": _TOLERANCES, "samples": _SAMPLES,
                             "expected": {"enum": ["FatouSubset", "Inconclusive"]},
                             "julia_witnesses": {"type": "boolean"}}},
    "thm212": {"required": ["id", "kind", "P", "Q", "family", "expected"],
               "properties": {"P": {"type": "string"}, "Q": {"type": "string"}, "family": _FAMILY,
                              "ambient": {"enum": ["affine", "projective"]},
                              "tolerances": _TOLERANCES, "samples": _SAMPLES,
                              "expected": {"enum": ["FatouSubset", "Inconclusive", "NotClosed"]}}},
    "classification": {"required": ["id", "kind", "alpha", "ambient", "expected"],
                       "properties": {"alpha": _COMPLEX, "ambient": {"enum": ["affine", "projective"]},
                                      "expected": {"type": "string"}}},
    "pseudogroup": {"required": ["id", "kind", "generators", "sample_disc", "metric", "max_length", "expected"],
                    "properties": {"generators": {"type": "array", "items": _GENERATOR, "minItems": 1},
                                   "sample_disc": _DISC, "n_samples": {"type": "integer", "minimum": 1},
                                   "metric": {"enum": ["euclidean", "poincare"]},
                                   "max_length": {"type": "integer", "minimum": 1, "maximum": 8},
                                   "margin": {"type": "number", "exclusiveMinimum": 0},
                                   "ball": {"enum": ["bound", "exact"]},
                                   "n_oracle_words": {"type": "integer", "minimum": 0},
                                   "expected": {"enum": ["NoViolations", "Violations", "NotIsometric"]}}},
    "counterexamples": {"required": ["id", "kind", "expected"],
                        "properties": {"expected": {"enum": ["Confirmed"]}}},
}

for _k, _s in SCENARIO_SCHEMAS.items():
    _s.update({"type": "object", **_STRICT})
    _s["properties"] = {**_COMMON, "kind": {"const": _k}, **_s["properties"]}

CONFIG_SCHEMA = {
    "type": "object", **_STRICT, "required": ["scenarios"],
    "properties": {"schema_version": {"const": SCHEMA_VERSION}, "seed": {"type": "integer", "minimum": 0},
                   "timeout": {"type": "number", "exclusiveMinimum": 0},
                   "scenarios": {"type": "array", "minItems": 1, "items": {"type": "object"}}},
}


def tool_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


# ---------------------------------------------------------------- parsing


def to_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", "").replace("i", "j"))
        except ValueError as exc:
            raise ConfigError(f"not a complex number: {v!r}") from exc
    return complex(v)


@dataclass
class Config:
    scenarios: list
    seed: int | None = None
    timeout: float = DEFAULT_TIMEOUT
    path: str = ""


def _validate(schema, data, where):
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path)
        raise ConfigError(f"{where}{'/' + loc if loc else ''}: {exc.message}") from None


def parse_config(text: str, where: str = "<config>") -> Config:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{where}: not valid YAML ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: top level must be a mapping")
    _validate(CONFIG_SCHEMA, data, where)
    ids = set()
    out = []
    for i, sc in enumerate(data["scenarios"]):
        kind = sc.get("kind")
        if kind not in SCENARIO_SCHEMAS:
            raise ConfigError(f"{where}/scenarios/{i}: unknown kind {kind!r}")
        _validate(SCENARIO_SCHEMAS[kind], sc, f"{where}/scenarios/{i}")
        if sc["id"] in ids:
            raise ConfigError(f"{where}: duplicate scenario id {sc['id']!r}")
        ids.add(sc["id"])
        _resolve(sc, f"{where}/scenarios/{i}")
        out.append(sc)
    return Config(out, data.get("seed"), float(data.get("timeout", DEFAULT_TIMEOUT)), where)


def load_config(path) -> Config:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text(), str(p))


def bundled_paths() -> list:
    root = resources.files("fatou_foliations") / "scenarios"
    return sorted((p for p in root.iterdir() if p.name.endswith(".yaml")), key=lambda p: p.name)


def load_bundled() -> Config:
    scen, seen = [], set()
    for p in bundled_paths():
        c = parse_config(p.read_text(), f"bundled:{p.name}")
        for s in c.scenarios:
            if s["id"] in seen:
                raise ConfigError(f"duplicate bundled scenario id {s['id']!r}")
            seen.add(s["id"])
            scen.append(s)
    return Config(scen, None, DEFAULT_TIMEOUT, "bundled")


def _resolve(sc, where):
    """Build every object once so that bad cross-references fail at load time."""
    try:
        if sc["kind"] == "thm26":
            F = build_foliation(sc["foliation"])
            build_region(sc["region"], F.ambient)
            build_form(sc["form"])
            fam = build_family(sc["family"])
            if fam.ambient is not F.ambient:
                raise ConfigError(f"family {fam.name} does not live in the {F.ambient.value} ambient")
        elif sc["kind"] == "thm212":
            forms.Poly2(sc["P"])
            forms.Poly2(sc["Q"])
            build_family(sc["family"])
        elif sc["kind"] == "classification":
            if to_complex(sc["alpha"]) == 0:
                raise ConfigError("alpha must be nonzero")
        elif sc["kind"] == "pseudogroup":
            build_generators(sc["generators"])
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    except (FatouError, ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def build_foliation(d) -> LinearFoliation:
    lam, mu = to_complex(d["lambda"]), to_complex(d["mu"])
    if lam == 0 or mu == 0:
        raise ConfigError("lambda and mu must be nonzero")
    try:
        return LinearFoliation(lam, mu, Ambient(d["ambient"]))
    except InvalidFoliation as exc:
        raise ConfigError(str(exc)) from None


def build_region(d, ambient: Ambient, seed: int = 0) -> RegionSpec:
    kw = {k: d[k] for k in ("reach", "radius", "swap") if k in d}
    return RegionSpec(ambient, RegionKind(d["kind"]), seed=seed, **kw)


def build_form(d):
    t = d["type"]
    if t == "OmegaPrime":
        phi = forms.OmegaPrime(to_complex(d["lambda"]), to_complex(d["mu"]))
    elif t == "Eta":
        phi = forms.Eta(to_complex(d["alpha"]))
    elif t == "Nu":
        phi = forms.Nu(to_complex(d["alpha"]))
    elif t == "Gamma":
        phi = forms.Gamma(to_complex(d["alpha"]), float(d.get("k", 1.0)), float(d.get("l", 1.0)))
    elif t == "EtaPrime":
        phi = forms.EtaPrime()
    else:
        phi = forms.ConstantForm(to_complex(d["a"]), to_complex(d["b"]))
    return forms.SwappedForm(phi) if d.get("swap") else phi


def build_family(d):
    kw = {}
    for k in ("alpha", "swap"):
        if k in d:
            kw[k] = d[k]
    for k in ("a", "b"):
        if k in d:
            kw[k] = to_complex(d[k])
    try:
        return approx.make_family(d["type"], **kw)
    except TypeError as exc:
        raise ConfigError(f"family {d['type']}: {exc}") from None


def build_generators(items):
    from .pseudogroup import Generator, GDisc, Mobius

    gens = []
    for g in items:
        m = g["map"]
        mob = Mobius(to_complex(m.get("a", 1)), to_complex(m.get("b", 0)), to_complex(m.get("c", 0)),
                     to_complex(m.get("d", 1)))
        dom = GDisc.disc(to_complex(g["domain"]["center"]), float(g["domain"]["radius"]))
        ext = GDisc.disc(to_complex(g["extension"]["center"]), float(g["extension"]["radius"]))
        gens.append(Generator(g["id"], mob, dom, ext))
    return gens


# ---------------------------------------------------------------- execution


def _params(sc, seed, overrides):
    from .verifier import CheckParams

    p = CheckParams(seed=seed)
    tol = {**sc.get("tolerances", {}), **(overrides or {})}
    names = {"invariance": "invariance_tol", "c_min": "c_min", "closedness": "closed_tol",
             "holonomy": "holonomy_tol", "stability": "stability"}
    p = replace(p, **{names[k]: float(v) for k, v in tol.items() if k in names})
    return replace(p, **sc.get("samples", {}))


def _run_thm26(sc, seed, overrides):
    from . import verifier

    F = build_foliation(sc["foliation"])
    U = build_region(sc["region"], F.ambient, seed)
    params = _params(sc, seed, overrides)
    v = verifier.check_thm26(F, U, build_form(sc["form"]), build_family(sc["family"]), params)
    out = {"verdict": v.kind, "result": v.as_dict(), "tolerances": params.as_dict()}
    if sc.get("julia_witnesses"):
        W = verifier.julia_witnesses(F, 20, seed)
        excl = verifier.excludes_witnesses(U, W) if v.kind == "FatouSubset" else True
        out["julia_witnesses"] = {"n": int(len(W)), "excluded": bool(excl)}
        if not excl:
            out["verdict"] = "WitnessInsideCertifiedRegion"
    return out


def _run_thm212(sc, seed, overrides):
    from . import verifier

    params = _params(sc, seed, overrides)
    try:
        v = verifier.check_thm212(sc["P"], sc["Q"], build_family(sc["family"]), sc.get("ambient", "affine"),
                                  params)
    except NotClosed as exc:
        return {"verdict": "NotClosed", "tolerances": params.as_dict(),
                "result": {"message": str(exc), "residual": exc.residual, "point": exc.point,
                           "symbolic": exc.symbolic}}
    return {"verdict": v.kind, "result": v.as_dict(), "tolerances": params.as_dict()}


def _run_classification(sc, seed, overrides):
    from .verifier import known_classification

    d = known_classification(to_complex(sc["alpha"]), sc["ambient"])
    got = d.as_dict()
    return {"verdict": got["fatou"], "result": got}


def _run_pseudogroup(sc, seed, overrides):
    from . import pseudogroup as pg

    gens = build_generators(sc["generators"])
    rng = np.random.default_rng(seed)
    sd = sc["sample_disc"]
    K = pg.sample_disc(rng, to_complex(sd["center"]), float(sd["radius"]), int(sc.get("n_samples", 20)))
    h = pg.euclidean_metric() if sc["metric"] == "euclidean" else pg.poincare_metric()
    delta, C = pg.estimate_constants(gens)
    dp = pg.extension_radius(delta, h.c, C)
    rep = pg.verify_extension(gens, K, h, int(sc["max_length"]), dp, float(sc.get("margin", math.inf)),
                              ball=sc.get("ball", "bound"))
    # independent route on a deterministic subset of words
    gmap = {g.id: g for g in gens}
    worst, checked = 0.0, 0
    n_or = int(sc.get("n_oracle_words", 40))
    for k in range(n_or):
        L = 1 + k % int(sc["max_length"])
        steps = [(gens[int(rng.integers(len(gens)))].id, bool(rng.random() < 0.5)) for _ in range(L)]
        w = pg.word_from(gmap, steps)
        p = K[k % len(K)]
        for which, attr in (("domain", "domain"), ("ext", "extension")):
            a = w.radius_at(p, attr)
            b = pg.oracle_radius(gmap, steps, p, which)
            worst = max(worst, abs(a - b))
            checked += 1
    verdict = "NotIsometric" if not rep.isometric else ("NoViolations" if rep.ok else "Violations")
    return {"verdict": verdict,
            "result": {"delta": delta, "C": C, "c": h.c, "report": rep.as_dict(),
                       "oracle": {"n_checks": checked, "max_abs_radius_difference": worst,
                                  "agrees": bool(worst <= 1e-9)}}}


def _run_counterexamples(sc, seed, overrides):
    from .verifier import counterexample_suite

    r = counterexample_suite(seed)
    decay = [d["estimate"] for d in r["not_bounded_below"]["decay"]]
    ok = (r["no_invariant_metric"]["is_hyperbolic"]
          and r["no_invariant_metric"]["relative_error"] < 1e-6
          and all(decay[i] / decay[i + 1] >= 10 for i in range(len(decay) - 1)))
    return {"verdict": "Confirmed" if ok else "NotConfirmed", "result": r}


RUNNERS = {"thm26": _run_thm26, "thm212": _run_thm212, "classification": _run_classification,
           "pseudogroup": _run_pseudogroup, "counterexamples": _run_counterexamples}


def execute(sc: dict, seed: int = 0, overrides: dict | None = None) -> dict:
    """Run one scenario in the current process; returns the report body."""
    from .verifier import _jsonable

    sc_seed = int(sc.get("seed", seed))
    t0 = time.perf_counter()
    try:
        body = RUNNERS[sc["kind"]](sc, sc_seed, overrides)
    except FatouError as exc:
        body = {"verdict": f"Error:{type(exc).__name__}", "result": {"message": str(exc)}}
    wall = time.perf_counter() - t0
    report = {
        "schema_version": SCHEMA_VERSION,
        "scenario": sc["id"],
        "kind": sc["kind"],
        "description": sc.get("description", ""),
        "source": sc.get("source", ""),
        "seed": sc_seed,
        "expected": sc["expected"],
        "tool_version": tool_version(),
        **body,
        "wall_time_s": wall,
    }
    report["passed"] = report["verdict"] == sc["expected"]
    return _jsonable(report)


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=True) + "\n"


def strip_timing(text: str) -> str:
    d = json.loads(text)
    d.pop("wall_time_s", None)
    return json.dumps(d, sort_keys=True)


@dataclass
class RunResult:
    reports: list = field(default_factory=list)
    paths: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.get("passed") for r in self.reports)


def _worker(args):
    sc, seed, overrides = args
    return execute(sc, seed, overrides)


def run_scenarios(cfg: Config, out_dir, seed: int | None = None, overrides: dict | None = None,
                  jobs: int = 1, timeout: float | None = None) -> RunResult:
    """Run every scenario in a worker pool and write ``<out_dir>/<id>.json`` plus ``summary.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base_seed = seed if seed is not None else (cfg.seed or 0)
    limit = timeout if timeout is not None else cfg.timeout
    res = RunResult()
    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
    pool = ctx.Pool(processes=max(1, int(jobs)))
    try:
        pending = [(sc, pool.apply_async(_worker, ((sc, base_seed, overrides),))) for sc in cfg.scenarios]
        for sc, fut in pending:
            try:
                rep = fut.get(timeout=float(sc.get("timeout", limit)))
            except mp.TimeoutError:
                rep = {"schema_version": SCHEMA_VERSION, "scenario": sc["id"], "kind": sc["kind"],
                       "expected": sc["expected"], "verdict": "Timeout", "passed": False,
                       "result": {"timeout_s": float(sc.get("timeout", limit))}, "tool_version": tool_version()}
            # report writes happen here only, one at a time
            p = out / f"{sc['id']}.json"
            p.write_text(dumps(rep))
            res.reports.append(rep)
            res.paths.append(p)
    finally:
        pool.terminate()
        pool.join()
    summary = {"schema_version": SCHEMA_VERSION, "config": cfg.path, "seed": base_seed,
               "scenarios": [{"id": r["scenario"], "verdict": r["verdict"], "expected": r["expected"],
                              "passed": r["passed"]} for r in res.reports],
               "all_passed": res.ok}
    (out / "summary.json").write_text(dumps(summary))
    return res
