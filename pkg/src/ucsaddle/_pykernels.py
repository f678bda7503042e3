"""Pure-Python reference versions of the compiled kernels.

Used when the extension is not built, or when ``UCSADDLE_PURE_PYTHON=1``.
``fgm_loop`` doubles as the generic path for objectives without a compiled
specialisation.
"""

import math

import numpy as np

DBL_EPS = np.finfo(float).eps


def fgm_loop(value_grad, y0, max_iter, l_init, slack_eps, grad_tol, l_cap):
    """Universal fast gradient method (Euclidean, unconstrained).

    ``value_grad(y)`` returns ``(f(y), grad f(y))``. With ``slack_eps = 0``
    this is the accelerated gradient method with backtracking on the local
    Lipschitz estimate; a positive slack gives the Hölder-universal variant.

    Returns ``(y, grad_y, iterations, last_m, max_accepted_m, status)``;
    ``status`` is 1 when the estimate exceeded ``l_cap``.
    """
    x = np.array(y0, dtype=float)
    v = x.copy()
    _, g = value_grad(x)
    big_a = 0.0
    m = float(l_init)
    max_acc = 0.0
    k = 0
    status = 0
    while k < max_iter:
        if np.linalg.norm(g) <= grad_tol:
            break
        while True:
            a = (1.0 + math.sqrt(1.0 + 4.0 * m * big_a)) / (2.0 * m)
            a_new = big_a + a
            tau = a / a_new
            xk = tau * v + (1.0 - tau) * x
            fx, gk = value_grad(xk)
            xh = v - a * gk
            yn = tau * xh + (1.0 - tau) * x
            fy, gy = value_grad(yn)
            d = yn - xk
            bound = (fx + float(gk @ d) + 0.5 * m * float(d @ d)
                     + 0.5 * tau * slack_eps + 4.0 * DBL_EPS * (abs(fx) + abs(fy)))
            if fy <= bound:
                break
            m *= 2.0
            if m > l_cap:
                status = 1
                break
        if status:
            break
        x, v, g = yn, xh, gy
        big_a = a_new
        max_acc = max(max_acc, m)
        m *= 0.5
        k += 1
    return x, g, k, m, max_acc, status


def power_value_grad(y, b, sigma, q):
    nrm = float(np.linalg.norm(y))
    if q == 2.0:
        fac = sigma
    elif nrm == 0.0:
        fac = 0.0
    else:
        fac = sigma * nrm ** (q - 2.0)
    val = -float(b @ y) if nrm == 0.0 else sigma / q * nrm ** q - float(b @ y)
    return val, fac * y - b


def fgm_power(y0, b, sigma, q, max_iter, l_init, slack_eps, grad_tol, l_cap):
    b = np.asarray(b, dtype=float)
    return fgm_loop(lambda y: power_value_grad(y, b, sigma, q), y0, max_iter,
                    l_init, slack_eps, grad_tol, l_cap)


def project_simplex(point, scale):
    point = np.asarray(point, dtype=float)
    u = np.sort(point)[::-1]
    cand = (np.cumsum(u) - scale) / np.arange(1, u.size + 1)
    # last index passing the test = largest support
    rho = np.nonzero(u - cand >= 0.0)[0][-1]
    return np.maximum(point - cand[rho], 0.0)
