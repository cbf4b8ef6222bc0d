"""Command-line front end.

Exit codes: 0 when every scenario reaches its expected verdict, 1 when some
scenario does not, 2 for configuration or usage errors.
"""

from __future__ import annotations

import json
import math
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import approx, kernels, scenario
from .errors import ConfigError, FatouError, ResolutionTooLarge

MAX_RESOLUTION = 4096
ENV_OUT_DIR = "FATOU_OUT_DIR"
QUANTITIES = ("eq215_abs", "f_value", "metric_ratio", "multiplier_field")


def _default_out():
    return os.environ.get(ENV_OUT_DIR, "fatou-out")


def _parse_overrides(items):
    out = {}
    for it in items:
        if "=" not in it:
            raise ConfigError(f"tolerance override must be KEY=VALUE, got {it!r}")
        k, v = it.split("=", 1)
        if k not in ("invariance", "c_min", "closedness", "holonomy", "stability"):
            raise ConfigError(f"unknown tolerance {k!r}")
        try:
            out[k] = float(v)
        except ValueError:
            raise ConfigError(f"tolerance {k} needs a number, got {v!r}") from None
    return out


def _echo_json(obj):
    click.echo(json.dumps(obj, sort_keys=True, indent=2))


@click.group()
@click.version_option(scenario.tool_version(), prog_name="fatou-foliations")
def main():
    """Fatou-set certification for linear foliations of C^2 and CP^2."""


@main.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="Scenario file (YAML). Defaults to the bundled suite.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=None,
              help=f"Report directory (default ${ENV_OUT_DIR} or ./fatou-out).")
@click.option("--seed", type=int, default=None, help="Seed for scenarios that do not fix their own.")
@click.option("--tolerance", "tolerances", multiple=True, metavar="KEY=VALUE",
              help="Override a tolerance (invariance, c_min, closedness, holonomy, stability).")
@click.option("--jobs", type=click.IntRange(1, 64), default=1, show_default=True)
@click.option("--timeout", type=float, default=None, help="Per-scenario timeout in seconds (default 60).")
@click.option("--only", multiple=True, help="Run only these scenario ids.")
def run(config_path, out_dir, seed, tolerances, jobs, timeout, only):
    """Run scenarios and write one JSON report per scenario."""
    try:
        cfg = scenario.load_config(config_path) if config_path else scenario.load_bundled()
        overrides = _parse_overrides(tolerances)
        if only:
            missing = set(only) - {s["id"] for s in cfg.scenarios}
            if missing:
                raise ConfigError(f"unknown scenario ids: {sorted(missing)}")
            cfg.scenarios = [s for s in cfg.scenarios if s["id"] in only]
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    res = scenario.run_scenarios(cfg, out_dir or _default_out(), seed, overrides, jobs, timeout)
    for r in res.reports:
        mark = "ok  " if r["passed"] else "FAIL"
        click.echo(f"{mark} {r['scenario']}: {r['verdict']} (expected {r['expected']})")
    sys.exit(0 if res.ok else 1)


def _grid(quantity, alpha, resolution, lo, hi):
    lam = scenario.to_complex(alpha)
    if quantity == "eq215_abs":
        top = hi if hi is not None else 2.0
        ax = top * np.arange(1, resolution + 1) / resolution
        vals = np.abs(kernels.eq215_grid(lam, 1.0, ax, ax))
        cols = ["abs_x", "abs_y", "eq215_abs"]
        units = {"abs_x": "|x|", "abs_y": "|y|", "eq215_abs": "|lam(1-2|x|^2+|y|^2) + mu(1-2|y|^2+|x|^2)|, mu = 1"}
        return ax, ax, vals, cols, units, {"alpha": [lam.real, lam.imag]}
    if quantity == "f_value":
        a, b = (lo if lo is not None else 0.0), (hi if hi is not None else 2.0)
        ax = np.linspace(a, b, resolution)
        vals = kernels.f_grid(ax, ax)
        cols = ["abs_x", "abs_y", "f"]
        units = {"abs_x": "|x|", "abs_y": "|y|", "f": "|x|^2|y|^2/(1+|x|^2+|y|^2)^3"}
        return ax, ax, vals, cols, units, {}
    if quantity == "metric_ratio":
        a, b = (lo if lo is not None else 1e-3), (hi if hi is not None else 1.0)
        ax = np.geomspace(a, b, resolution)
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        from .charts import ReferenceMetricId
        from .forms import EtaPrime, dual_norm_sq

        vals = dual_norm_sq(EtaPrime(), X.astype(complex), Y.astype(complex), ReferenceMetricId.EUCLIDEAN2)
        cols = ["abs_x", "abs_y", "ratio"]
        units = {"abs_x": "|x|", "abs_y": "|y|",
                 "ratio": "h(v,v)/g(v,v) for h = |y dx + x dy|^2, Euclidean g, unit v orthogonal to the leaf"}
        return ax, ax, vals, cols, units, {"form": "EtaPrime"}
    a, b = (lo if lo is not None else -2.0), (hi if hi is not None else 2.0)
    ax = np.linspace(a, b, resolution)
    R, I = np.meshgrid(ax, ax, indexing="ij")
    A = R + 1j * I
    with np.errstate(all="ignore"):
        first = np.abs(np.exp(2j * np.pi * A))
        second = np.where(A == 0, np.nan, np.abs(np.exp(2j * np.pi / np.where(A == 0, 1, A))))
    vals = np.stack([first, second], axis=-1)
    cols = ["alpha_re", "alpha_im", "first_axis_abs", "second_axis_abs"]
    units = {"alpha_re": "Re alpha", "alpha_im": "Im alpha", "first_axis_abs": "|exp(2 pi i alpha)|",
             "second_axis_abs": "|exp(2 pi i / alpha)|"}
    return ax, ax, vals, cols, units, {}


def grid_export(quantity, path, alpha="1j", resolution=200, lo=None, hi=None):
    """Write a row-major CSV grid of ``quantity`` with a ``.meta.json`` sidecar."""
    if quantity not in QUANTITIES:
        raise ConfigError(f"unknown quantity {quantity!r}")
    if resolution < 2:
        raise ConfigError("resolution must be at least 2")
    if resolution > MAX_RESOLUTION:
        raise ResolutionTooLarge(f"resolution {resolution}^2 exceeds {MAX_RESOLUTION}^2")
    ax, ay, vals, cols, units, extra = _grid(quantity, alpha, resolution, lo, hi)
    rows = []
    for i in range(len(ax)):
        for j in range(len(ay)):
            v = vals[i, j]
            rows.append((ax[i], ay[j], *(np.atleast_1d(v).tolist())))
    meta = {"quantity": quantity, "resolution": resolution, "order": "row-major, first column slowest",
            "columns": units, **extra}
    approx.write_csv(path, cols, rows, meta)
    return path


@main.command()
@click.option("--quantity", type=click.Choice(QUANTITIES), required=True)
@click.option("--alpha", default="1j", show_default=True, help="alpha = lam/mu (eq215_abs only).")
@click.option("--resolution", type=int, default=200, show_default=True)
@click.option("--lo", type=float, default=None, help="Lower end of both axes.")
@click.option("--hi", type=float, default=None, help="Upper end of both axes.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=None)
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="CSV path (overrides --out-dir).")
def grid(quantity, alpha, resolution, lo, hi, out_dir, output):
    """Export a grid of a scalar quantity as CSV plus metadata."""
    path = Path(output) if output else Path(out_dir or _default_out()) / f"{quantity}.csv"
    try:
        grid_export(quantity, path, alpha, resolution, lo, hi)
    except (ConfigError, ResolutionTooLarge) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(str(path))


@main.command()
@click.option("--alpha", required=True)
@click.option("--ambient", type=click.Choice(["affine", "projective"]), default="projective", show_default=True)
def classify(alpha, ambient):
    """Print the known Fatou set of F_alpha or G_alpha."""
    from .verifier import known_classification

    try:
        d = known_classification(scenario.to_complex(alpha), ambient)
    except (ConfigError, FatouError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    _echo_json(d.as_dict())


@main.command()
@click.option("--alpha", required=True)
@click.option("--axis", type=click.Choice(["first", "second"]), default="first", show_default=True,
              help="first: loop in y around {y = 0}; second: loop in x around {x = 0}.")
@click.option("--tol", type=float, default=1e-9, show_default=True)
def holonomy(alpha, axis, tol):
    """Integrate the holonomy of one loop around a coordinate axis."""
    from .foliation import LinearFoliation
    from .holonomy import Axis, axis_loop, axis_multiplier, integrate_leaf, is_hyperbolic

    try:
        F = LinearFoliation.from_alpha(scenario.to_complex(alpha))
        ax = Axis.FIRST if axis == "first" else Axis.SECOND
        res = integrate_leaf(F, axis_loop(ax), tol)
    except (ConfigError, FatouError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    closed = axis_multiplier(F, ax)
    m = res.multiplier
    _echo_json({"alpha": [F.alpha.real, F.alpha.imag], "axis": ax.value, "multiplier": [m.real, m.imag],
                "multiplier_abs": abs(m), "closed_form": [closed.real, closed.imag],
                "relative_error": abs(m - closed) / abs(closed), "steps": res.steps,
                "error_estimate": res.integrator_error_estimate, "is_hyperbolic": is_hyperbolic(m),
                "backend": kernels.BACKEND})


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
def counterexamples(seed):
    """Print the counterexample report."""
    from .verifier import counterexample_suite

    r = counterexample_suite(seed)
    _echo_json(r)
    if not math.isfinite(r["no_invariant_metric"]["multiplier_abs"]):
        sys.exit(1)


if __name__ == "__main__":  # pragma: no cover
    main()
