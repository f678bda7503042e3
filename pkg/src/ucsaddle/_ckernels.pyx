# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops.

Semantics mirror :mod:`ucsaddle._pykernels` line for line; the test-suite
compares both on the same inputs.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow, fabs

cnp.import_array()

cdef double DBL_EPS = 2.220446049250313e-16


cdef inline double _norm(double[::1] a, Py_ssize_t n) noexcept nogil:
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        s += a[i] * a[i]
    return sqrt(s)


cdef inline double _power_value_grad(double[::1] y, double[::1] b, double sigma,
                                     double q, double[::1] grad,
                                     Py_ssize_t n) noexcept nogil:
    cdef double nrm = _norm(y, n)
    cdef double fac, val, lin = 0.0
    cdef Py_ssize_t i
    if q == 2.0:
        fac = sigma
    elif nrm == 0.0:
        fac = 0.0
    else:
        fac = sigma * pow(nrm, q - 2.0)
    for i in range(n):
        grad[i] = fac * y[i] - b[i]
        lin += b[i] * y[i]
    if nrm == 0.0:
        val = -lin
    else:
        val = sigma / q * pow(nrm, q) - lin
    return val


def fgm_power(double[::1] y0, double[::1] b, double sigma, double q,
              Py_ssize_t max_iter, double l_init, double slack_eps,
              double grad_tol, double l_cap):
    """Universal fast gradient method on ``(sigma/q)|y|^q - <b, y>``.

    Returns ``(y, grad_y, iterations, last_m, max_accepted_m, status)`` where
    ``status`` is 0 on normal exit and 1 when the local estimate exceeded
    ``l_cap``.
    """
    cdef Py_ssize_t n = y0.shape[0]
    cdef Py_ssize_t i, k = 0
    cdef int status = 0
    x_arr = np.array(y0, dtype=np.float64)
    v_arr = np.array(y0, dtype=np.float64)
    g_arr = np.empty(n, dtype=np.float64)
    xk_arr = np.empty(n, dtype=np.float64)
    gk_arr = np.empty(n, dtype=np.float64)
    xh_arr = np.empty(n, dtype=np.float64)
    yn_arr = np.empty(n, dtype=np.float64)
    gy_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double[::1] v = v_arr
    cdef double[::1] g = g_arr
    cdef double[::1] xk = xk_arr
    cdef double[::1] gk = gk_arr
    cdef double[::1] xh = xh_arr
    cdef double[::1] yn = yn_arr
    cdef double[::1] gy = gy_arr
    cdef double big_a = 0.0, a, a_new, tau, fx, fy, lin, sq, d
    cdef double m = l_init, max_acc = 0.0

    _power_value_grad(x, b, sigma, q, g, n)
    with nogil:
        while k < max_iter:
            if _norm(g, n) <= grad_tol:
                break
            while True:
                a = (1.0 + sqrt(1.0 + 4.0 * m * big_a)) / (2.0 * m)
                a_new = big_a + a
                tau = a / a_new
                for i in range(n):
                    xk[i] = tau * v[i] + (1.0 - tau) * x[i]
                fx = _power_value_grad(xk, b, sigma, q, gk, n)
                for i in range(n):
                    xh[i] = v[i] - a * gk[i]
                    yn[i] = tau * xh[i] + (1.0 - tau) * x[i]
                fy = _power_value_grad(yn, b, sigma, q, gy, n)
                lin = 0.0
                sq = 0.0
                for i in range(n):
                    d = yn[i] - xk[i]
                    lin += gk[i] * d
                    sq += d * d
                if fy <= (fx + lin + 0.5 * m * sq + 0.5 * tau * slack_eps
                          + 4.0 * DBL_EPS * (fabs(fx) + fabs(fy))):
                    break
                m = 2.0 * m
                if m > l_cap:
                    status = 1
                    break
            if status:
                break
            for i in range(n):
                x[i] = yn[i]
                v[i] = xh[i]
                g[i] = gy[i]
            big_a = a_new
            if m > max_acc:
                max_acc = m
            m = 0.5 * m
            k += 1
    return x_arr, g_arr, k, m, max_acc, status


def project_simplex(double[::1] point, double scale):
    """Euclidean projection onto ``{x >= 0, sum(x) = scale}`` (sort-and-threshold)."""
    cdef Py_ssize_t n = point.shape[0]
    cdef Py_ssize_t i, rho = 0
    u_arr = np.sort(np.asarray(point))[::-1].copy()
    cdef double[::1] u = u_arr
    cdef double csum = 0.0, theta = 0.0, cand
    for i in range(n):
        csum += u[i]
        cand = (csum - scale) / (i + 1)
        if u[i] - cand >= 0.0:
            rho = i + 1
            theta = cand
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = point[i] - theta if point[i] - theta > 0.0 else 0.0
    return out
