# cython: language_level=3
"""Compiled versions of the hot loops in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, pow, fabs

cnp.import_array()

DEF SEG_LINE = 0
DEF BASE_FLOOR = 1e-9
DEF LOCAL_SAFETY = 0.01

cdef double _C[7]
cdef double _A[7][6]
cdef double _B5[7]
cdef double _E[7]

_C[:] = [0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0]
_A[0][:] = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
_A[1][:] = [1.0 / 5, 0.0, 0.0, 0.0, 0.0, 0.0]
_A[2][:] = [3.0 / 40, 9.0 / 40, 0.0, 0.0, 0.0, 0.0]
_A[3][:] = [44.0 / 45, -56.0 / 15, 32.0 / 9, 0.0, 0.0, 0.0]
_A[4][:] = [19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0.0, 0.0]
_A[5][:] = [9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0.0]
_A[6][:] = [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84]
_B5[:] = [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0]
_E[:] = [35.0 / 384 - 5179.0 / 57600, 0.0, 500.0 / 1113 - 7571.0 / 16695,
         125.0 / 192 - 393.0 / 640, -2187.0 / 6784 + 92097.0 / 339200,
         11.0 / 84 - 187.0 / 2100, -1.0 / 40]


cdef inline void _base(int kind, double[:] p, double t, double complex *b, double complex *db) nogil:
    cdef double th, r
    cdef double complex e, p0, p1
    if kind == SEG_LINE:
        p0 = p[0] + 1j * p[1]
        p1 = p[2] + 1j * p[3]
        b[0] = p0 + t * (p1 - p0)
        db[0] = p1 - p0
    else:
        r = p[2]
        th = p[3] + t * (p[4] - p[3])
        e = cos(th) + 1j * sin(th)
        b[0] = (p[0] + 1j * p[1]) + r * e
        db[0] = 1j * r * (p[4] - p[3]) * e


cdef inline double _cabs(double complex z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


def leaf_dopri(long[:] kinds, double[:, :] params, double complex kappa, double complex f0,
               double tol, long max_steps=1000000):
    cdef double complex f = f0, fi, f5, err, b, db
    cdef double complex k[7]
    cdef long steps = 0
    cdef double err_max = 0.0, t, h, scale, en, fac, af, af5
    cdef Py_ssize_t s, i, j
    cdef int kind
    for s in range(kinds.shape[0]):
        kind = <int>kinds[s]
        t = 0.0
        h = 0.05
        while t < 1.0:
            if steps >= max_steps:
                return f, err_max, steps, 1
            if t + h > 1.0:
                h = 1.0 - t
            for i in range(7):
                fi = f
                for j in range(i):
                    fi = fi + h * _A[i][j] * k[j]
                _base(kind, params[s], t + _C[i] * h, &b, &db)
                if _cabs(b) <= BASE_FLOOR:
                    return f, err_max, steps, 2
                k[i] = kappa * fi * db / b
            f5 = f
            err = 0
            for i in range(7):
                f5 = f5 + h * _B5[i] * k[i]
                err = err + h * _E[i] * k[i]
            af = _cabs(f)
            af5 = _cabs(f5)
            scale = LOCAL_SAFETY * tol * (af if af > af5 else af5)
            en = _cabs(err) / scale
            if en <= 1.0:
                t += h
                f = f5
                steps += 1
                if en * LOCAL_SAFETY * tol > err_max:
                    err_max = en * LOCAL_SAFETY * tol
            if en > 0:
                fac = 0.9 * pow(en, -0.2)
            else:
                fac = 5.0
            if fac > 5.0:
                fac = 5.0
            if fac < 0.2:
                fac = 0.2
            h *= fac
            if h < 1e-14:
                return f, err_max, steps, 3
    return f, err_max, steps, 0


def eq215_grid(double complex lam, double complex mu, double[:] ax, double[:] ay):
    cdef Py_ssize_t i, j, nx = ax.shape[0], ny = ay.shape[0]
    out = np.empty((nx, ny), dtype=np.complex128)
    cdef double complex[:, :] o = out
    cdef double xx, yy
    for i in range(nx):
        xx = ax[i] * ax[i]
        for j in range(ny):
            yy = ay[j] * ay[j]
            o[i, j] = lam * (1.0 - 2.0 * xx + yy) + mu * (1.0 - 2.0 * yy + xx)
    return out


def f_grid(double[:] ax, double[:] ay):
    cdef Py_ssize_t i, j, nx = ax.shape[0], ny = ay.shape[0]
    out = np.empty((nx, ny), dtype=np.float64)
    cdef double[:, :] o = out
    cdef double xx, yy, d
    for i in range(nx):
        xx = ax[i] * ax[i]
        for j in range(ny):
            yy = ay[j] * ay[j]
            d = 1.0 + xx + yy
            o[i, j] = xx * yy / (d * d * d)
    return out


def dual_norm_fs(double complex[:] a, double complex[:] b, double complex[:] x, double complex[:] y):
    cdef Py_ssize_t i, n = a.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[:] o = out
    cdef double s, aa, bb, cc
    cdef double complex c
    for i in range(n):
        s = 1.0 + x[i].real * x[i].real + x[i].imag * x[i].imag + y[i].real * y[i].real + y[i].imag * y[i].imag
        aa = a[i].real * a[i].real + a[i].imag * a[i].imag
        bb = b[i].real * b[i].real + b[i].imag * b[i].imag
        c = a[i] * x[i] + b[i] * y[i]
        cc = c.real * c.real + c.imag * c.imag
        o[i] = s * (aa + bb + cc)
    return out
