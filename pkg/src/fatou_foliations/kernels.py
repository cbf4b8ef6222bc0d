"""Kernel dispatch: compiled ``_ckernels`` when available, else the pure-Python fallback.

Set ``FATOU_PURE_PYTHON=1`` to force the fallback (used by the benchmark and
the equivalence tests).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py as py

STATUS_OK = py.STATUS_OK
STATUS_MAX_STEPS = py.STATUS_MAX_STEPS
STATUS_SINGULAR = py.STATUS_SINGULAR
STATUS_STEP_UNDERFLOW = py.STATUS_STEP_UNDERFLOW
SEG_LINE = py.SEG_LINE
SEG_ARC = py.SEG_ARC


def _load():
    if os.environ.get("FATOU_PURE_PYTHON"):
        return py, "python"
    try:
        from . import _ckernels
    except ImportError:
        return py, "python"
    return _ckernels, "cython"


_impl, BACKEND = _load()


def leaf_dopri(kinds, params, kappa, f0, tol, max_steps=1_000_000, impl=None):
    m = impl or _impl
    kinds = np.ascontiguousarray(kinds, dtype=np.int64)
    params = np.ascontiguousarray(params, dtype=np.float64)
    f, err, steps, status = m.leaf_dopri(kinds, params, complex(kappa), complex(f0), float(tol), int(max_steps))
    return complex(f), float(err), int(steps), int(status)


def eq215_grid(lam, mu, ax, ay, impl=None):
    m = impl or _impl
    return m.eq215_grid(complex(lam), complex(mu), np.ascontiguousarray(ax, dtype=float),
                        np.ascontiguousarray(ay, dtype=float))


def f_grid(ax, ay, impl=None):
    m = impl or _impl
    return m.f_grid(np.ascontiguousarray(ax, dtype=float), np.ascontiguousarray(ay, dtype=float))


def dual_norm_fs(a, b, x, y, impl=None):
    m = impl or _impl
    args = [np.ascontiguousarray(np.atleast_1d(v), dtype=complex) for v in (a, b, x, y)]
    return np.asarray(m.dual_norm_fs(*args))


def compiled_module():
    """The compiled module, or ``None`` when the extension was not built."""
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels
