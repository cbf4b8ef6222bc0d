"""Pure-Python versions of the hot loops.

The compiled module ``_ckernels`` implements the same functions with the same
arithmetic; :mod:`fatou_foliations.kernels` picks one at import time.
"""

from __future__ import annotations

import cmath

import numpy as np

SEG_LINE = 0
SEG_ARC = 1

STATUS_OK = 0
STATUS_MAX_STEPS = 1
STATUS_SINGULAR = 2
STATUS_STEP_UNDERFLOW = 3

BASE_FLOOR = 1e-9
# local steps aim at this fraction of tol so the accumulated error stays below tol
LOCAL_SAFETY = 0.01

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


def _base(kind, p, t):
    """Base point b(t) and velocity b'(t) on one path segment, t in [0, 1]."""
    if kind == SEG_LINE:
        p0 = complex(p[0], p[1])
        p1 = complex(p[2], p[3])
        return p0 + t * (p1 - p0), p1 - p0
    c = complex(p[0], p[1])
    r, th0, th1 = p[2], p[3], p[4]
    th = th0 + t * (th1 - th0)
    e = cmath.exp(1j * th)
    return c + r * e, 1j * r * (th1 - th0) * e


def leaf_dopri(kinds, params, kappa, f0, tol, max_steps=1_000_000):
    """Integrate ``f' = kappa * f * b'/b`` along a piecewise path.

    Returns ``(f_end, max_local_error, steps, status)``.  The error control is
    relative (the fiber of a linear leaf never vanishes) with local target
    ``LOCAL_SAFETY * tol``.
    """
    kappa = complex(kappa)
    f = complex(f0)
    steps = 0
    err_max = 0.0
    for s in range(len(kinds)):
        kind = int(kinds[s])
        p = params[s]
        t = 0.0
        h = 0.05
        while t < 1.0:
            if steps >= max_steps:
                return f, err_max, steps, STATUS_MAX_STEPS
            if t + h > 1.0:
                h = 1.0 - t
            k = [0j] * 7
            for i in range(7):
                fi = f
                for j in range(i):
                    fi += h * _A[i][j] * k[j]
                b, db = _base(kind, p, t + _C[i] * h)
                if abs(b) <= BASE_FLOOR:
                    return f, err_max, steps, STATUS_SINGULAR
                k[i] = kappa * fi * db / b
            f5 = f
            err = 0j
            for i in range(7):
                f5 += h * _B5[i] * k[i]
                err += h * _E[i] * k[i]
            scale = LOCAL_SAFETY * tol * max(abs(f), abs(f5))
            en = abs(err) / scale
            if en <= 1.0:
                t += h
                f = f5
                steps += 1
                if en * LOCAL_SAFETY * tol > err_max:
                    err_max = en * LOCAL_SAFETY * tol
            fac = 0.9 * en ** -0.2 if en > 0 else 5.0
            h *= min(5.0, max(0.2, fac))
            if h < 1e-14:
                return f, err_max, steps, STATUS_STEP_UNDERFLOW
    return f, err_max, steps, STATUS_OK


def eq215_grid(lam, mu, ax, ay):
    """``lam(1-2|x|^2+|y|^2) + mu(1-2|y|^2+|x|^2)`` on the grid ``ax`` x ``ay`` of moduli."""
    lam = complex(lam)
    mu = complex(mu)
    out = np.empty((len(ax), len(ay)), dtype=complex)
    for i in range(len(ax)):
        xx = ax[i] * ax[i]
        for j in range(len(ay)):
            yy = ay[j] * ay[j]
            out[i, j] = lam * (1.0 - 2.0 * xx + yy) + mu * (1.0 - 2.0 * yy + xx)
    return out


def f_grid(ax, ay):
    """``|x|^2 |y|^2 / (1+|x|^2+|y|^2)^3`` on a grid of moduli."""
    out = np.empty((len(ax), len(ay)))
    for i in range(len(ax)):
        xx = ax[i] * ax[i]
        for j in range(len(ay)):
            yy = ay[j] * ay[j]
            d = 1.0 + xx + yy
            out[i, j] = xx * yy / (d * d * d)
    return out


def dual_norm_fs(a, b, x, y):
    """Fubini-Study dual norm squared of the covector ``a dx + b dy`` at ``(x, y)``."""
    n = len(a)
    out = np.empty(n)
    for i in range(n):
        s = 1.0 + abs(x[i]) ** 2 + abs(y[i]) ** 2
        out[i] = s * (abs(a[i]) ** 2 + abs(b[i]) ** 2 + abs(a[i] * x[i] + b[i] * y[i]) ** 2)
    return out

