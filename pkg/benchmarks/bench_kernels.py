"""Compare the compiled kernels with the pure-Python fallback.

Usage: ``python benchmarks/bench_kernels.py [--quick] [--json PATH]``
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import timeit

import numpy as np

from fatou_foliations import _kernels_py, kernels
from fatou_foliations.foliation import LinearFoliation
from fatou_foliations.holonomy import Axis, axis_loop, leaf_exponent


def _cases(quick: bool):
    kinds, params = axis_loop(Axis.SECOND).arrays()
    kappa = leaf_exponent(LinearFoliation.from_alpha(1j), axis_loop(Axis.SECOND).base)
    n = 64 if quick else 400
    ax = np.linspace(0.01, 2.0, n)
    rng = np.random.default_rng(0)
    m = 2000 if quick else 100_000
    z = rng.normal(size=(4, m)) + 1j * rng.normal(size=(4, m))
    return {
        "leaf_dopri (alpha = i loop, tol 1e-10)": (kernels.leaf_dopri, (kinds, params, kappa, 1.0, 1e-10)),
        f"eq215_grid ({n}x{n})": (kernels.eq215_grid, (1j, 1.0, ax, ax)),
        f"f_grid ({n}x{n})": (kernels.f_grid, (ax, ax)),
        f"dual_norm_fs ({m} points)": (kernels.dual_norm_fs, tuple(z)),
    }


def _result_close(a, b):
    if isinstance(a, tuple):
        return abs(a[0] - b[0]) <= 1e-9 * abs(b[0]) and a[3] == b[3]
    return bool(np.allclose(np.asarray(a), np.asarray(b), rtol=1e-12, atol=0))


def run(quick: bool = False, repeat: int = 3) -> list:
    comp = kernels.compiled_module()
    rows = []
    for name, (fn, args) in _cases(quick).items():
        t_py = min(timeit.repeat(lambda: fn(*args, impl=_kernels_py), number=1, repeat=repeat))
        row = {"kernel": name, "python_s": t_py, "cython_s": None, "speedup": None, "agree": None}
        if comp is not None:
            t_c = min(timeit.repeat(lambda: fn(*args, impl=comp), number=1, repeat=repeat))
            row.update(cython_s=t_c, speedup=t_py / t_c if t_c > 0 else math.inf,
                       agree=_result_close(fn(*args, impl=comp), fn(*args, impl=_kernels_py)))
        rows.append(row)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--json", default=None)
    a = ap.parse_args(argv)
    rows = run(a.quick)
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':44s} {'python':>11s} {'cython':>11s} {'speedup':>9s}  agree")
    for r in rows:
        c = "-" if r["cython_s"] is None else f"{r['cython_s'] * 1e3:9.3f}ms"
        s = "-" if r["speedup"] is None else f"{r['speedup']:8.1f}x"
        print(f"{r['kernel']:44s} {r['python_s'] * 1e3:9.3f}ms {c:>11s} {s:>9s}  {r['agree']}")
    if a.json:
        with open(a.json, "w") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)
    return 0 if all(r["agree"] in (None, True) for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
