# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled conditional inversion for the closed-form density families.

Same contract as ``_kernels_py.conditional_quantile``.  Root finding is a
bracketed Illinois iteration on ``tau = log t`` with a bisection safeguard,
so the returned ``x`` agrees with the numpy path to ~1e-12 relative.
"""

import numpy as np
from libc.math cimport exp, log, log1p, NAN, M_E
from scipy.special.cython_special cimport exp1

DEF TAU_MAX = 700.0
DEF TAU_TOL = 1e-12
DEF MAX_ITER = 400

cdef double E1_AT_1 = exp1(<double>1.0)


cdef struct Family:
    int code
    double param
    const double* ratio
    const double* fw
    const double* gw
    Py_ssize_t m


cdef inline double softplus(double z) noexcept nogil:
    if z > 0:
        return z + log1p(exp(-z))
    return log1p(exp(z))


cdef inline double exp_ratio_f_tail(double t, double c) noexcept nogil:
    cdef double w
    if t >= 1.0:
        return c * (t + 2.0) * exp(-t)
    w = 1.0 / t
    return c * (E1_AT_1 + 4.0 / M_E - exp1(w) - exp(-w))


cdef void norms_at(const Family* fam, double tau, double* f_e, double* g_d) noexcept nogil:
    cdef double t = exp(tau)
    cdef double a, big, p, q
    cdef Py_ssize_t i
    if fam.code == 1:
        a = fam.param
        big = softplus(a * tau)
        f_e[0] = exp(-(1.0 - 1.0 / a) * big)
        g_d[0] = exp((a - 1.0) * (tau - big / a))
    elif fam.code == 2:
        p = 1.0 / (1.0 + t)
        q = 1.0 / (1.0 + exp(-tau))
        f_e[0] = fam.param * p * (1.0 + q)
        g_d[0] = fam.param * q * (1.0 + p)
    elif fam.code == 3:
        f_e[0] = exp_ratio_f_tail(t, fam.param)
        g_d[0] = exp_ratio_f_tail(1.0 / t, fam.param)
    else:
        f_e[0] = 0.0
        g_d[0] = 0.0
    for i in range(fam.m):
        if fam.ratio[i] > t:
            f_e[0] += fam.fw[i]
        else:
            g_d[0] += fam.gw[i]


cdef double phi(const Family* fam, double tau, double y, double u) noexcept nogil:
    cdef double f_e, g_d
    norms_at(fam, tau, &f_e, &g_d)
    if g_d <= 0:
        return -u
    return g_d * exp(-(f_e / exp(tau) - (1.0 - g_d)) / y) - u


cdef double invert_one(const Family* fam, double y, double u) noexcept nogil:
    cdef double a, b, c, fa, fb, fc, width, checkpoint
    cdef int side = 0, it
    cdef bint bisect = False

    fc = phi(fam, 0.0, y, u)
    if fc >= 0:
        b = 0.0
        fb = fc
        a = -1.0
        fa = phi(fam, a, y, u)
        while fa >= 0:
            b = a
            fb = fa
            a *= 2.0
            if a < -TAU_MAX:
                return NAN
            fa = phi(fam, a, y, u)
    else:
        a = 0.0
        fa = fc
        b = 1.0
        fb = phi(fam, b, y, u)
        while fb < 0:
            a = b
            fa = fb
            b *= 2.0
            if b > TAU_MAX:
                return NAN
            fb = phi(fam, b, y, u)

    checkpoint = b - a
    for it in range(MAX_ITER):
        width = b - a
        if width <= TAU_TOL:
            break
        if it % 3 == 2:
            bisect = width > 0.5 * checkpoint
            checkpoint = width
        if bisect or fb == fa:
            c = 0.5 * (a + b)
            bisect = False
        else:
            c = b - fb * (b - a) / (fb - fa)
            if not (a < c < b):
                c = 0.5 * (a + b)
        if c <= a or c >= b:
            break
        fc = phi(fam, c, y, u)
        if fc >= 0:
            b = c
            fb = fc
            if side == 1:
                fa *= 0.5
            side = 1
        else:
            a = c
            fa = fc
            if side == -1:
                fb *= 0.5
            side = -1
    return y * exp(b)


def conditional_quantile(int family, double param, atom_ratio, atom_fw, atom_gw, y, u):
    """Solve ``P(X <= x | Y = y_i) = u_i`` for each ``i``; NaN on failure."""
    cdef double[::1] r = np.ascontiguousarray(atom_ratio, dtype=np.float64)
    cdef double[::1] fw = np.ascontiguousarray(atom_fw, dtype=np.float64)
    cdef double[::1] gw = np.ascontiguousarray(atom_gw, dtype=np.float64)
    cdef double[::1] yy = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = yy.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double dummy = 0.0
    cdef Family fam
    fam.code = family
    fam.param = param
    fam.m = r.shape[0]
    fam.ratio = &r[0] if fam.m else &dummy
    fam.fw = &fw[0] if fam.m else &dummy
    fam.gw = &gw[0] if fam.m else &dummy
    with nogil:
        for i in range(n):
            ov[i] = invert_one(&fam, yy[i], uu[i])
    return out
