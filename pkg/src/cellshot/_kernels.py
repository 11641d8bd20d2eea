"""Numba inner loops: rho-family evaluation, M-scale fixed point, simple-S IRLS.

Everything here works on plain float64 arrays; the public modules wrap these
kernels with validated dataclass interfaces. Rho families are dispatched by an
integer code so the kernels stay nopython-compatible.
"""

import numpy as np
from numba import njit

KIND_BIWEIGHT = 0
KIND_SKIPPED_HUBER = 1
KIND_LQQ = 2

# simple_s status codes
STATUS_CONVERGED = 0
STATUS_MAXITER = 1
STATUS_ALL_WEIGHTS_ZERO = 2
STATUS_DEGENERATE = 3
STATUS_EXACT = 4


@njit(cache=True)
def _lqq_tail(b, c, s):
    # length of the descending quadratic piece, chosen so psi reaches 0 smoothly
    return (s * b - 2.0 * b - 2.0 * c) / (1.0 - s)


@njit(cache=True)
def rho1(z, kind, c0, c1, c2):
    u = abs(z)
    if kind == KIND_BIWEIGHT:
        if u >= c0:
            return c0 * c0 / 6.0
        t = 1.0 - (u / c0) ** 2
        return c0 * c0 / 6.0 * (1.0 - t * t * t)
    elif kind == KIND_SKIPPED_HUBER:
        if u > c0:
            return 0.5 * c0 * c0
        return 0.5 * u * u
    else:
        b = c0
        c = c1
        s = c2
        if u <= c:
            return 0.5 * u * u
        if u <= b + c:
            return 0.5 * u * u - s * (u - c) ** 3 / (6.0 * b)
        a = _lqq_tail(b, c, s)
        rb = 0.5 * (b + c) ** 2 - s * b * b / 6.0
        h = c + b - 0.5 * s * b
        t = u - b - c
        if t > a:
            t = a
        return rb + h * t + (1.0 - s) * (0.5 * t * t - t ** 3 / (6.0 * a))


@njit(cache=True)
def psi1(z, kind, c0, c1, c2):
    u = abs(z)
    sg = 1.0 if z >= 0.0 else -1.0
    if kind == KIND_BIWEIGHT:
        if u >= c0:
            return 0.0
        t = 1.0 - (u / c0) ** 2
        return z * t * t
    elif kind == KIND_SKIPPED_HUBER:
        if u > c0:
            return 0.0
        return z
    else:
        b = c0
        c = c1
        s = c2
        if u <= c:
            return z
        if u <= b + c:
            return sg * (u - s * (u - c) ** 2 / (2.0 * b))
        a = _lqq_tail(b, c, s)
        if u >= b + c + a:
            return 0.0
        t = u - b - c
        h = c + b - 0.5 * s * b
        return sg * (h + (1.0 - s) * (t - t * t / (2.0 * a)))


@njit(cache=True)
def w1(z, kind, c0, c1, c2):
    # IRLS weight psi(z)/z, continuous at 0 where it equals 1
    if z == 0.0:
        return 1.0
    return psi1(z, kind, c0, c1, c2) / z


@njit(cache=True)
def rho_vec(z, kind, c0, c1, c2):
    out = np.empty(z.shape, dtype=np.float64)
    for i in range(z.size):
        out[i] = rho1(z[i], kind, c0, c1, c2)
    return out


@njit(cache=True)
def psi_vec(z, kind, c0, c1, c2):
    out = np.empty(z.shape, dtype=np.float64)
    for i in range(z.size):
        out[i] = psi1(z[i], kind, c0, c1, c2)
    return out


@njit(cache=True)
def w_vec(z, kind, c0, c1, c2):
    out = np.empty(z.shape, dtype=np.float64)
    for i in range(z.size):
        out[i] = w1(z[i], kind, c0, c1, c2)
    return out


@njit(cache=True)
def mscale_fixed_point(res, kind, c0, c1, c2, delta, s0, eps1, max_steps):
    """Iterate s <- s * sqrt(sum(rho(res/s)) / (n*delta)) until the ratio
    stabilizes within eps1. Returns (s, steps, converged)."""
    n = res.size
    s = s0
    steps = 0
    converged = False
    while steps < max_steps:
        steps += 1
        acc = 0.0
        for i in range(n):
            acc += rho1(res[i] / s, kind, c0, c1, c2)
        s_new = s * np.sqrt(acc / (delta * n))
        if s_new <= 0.0 or not np.isfinite(s_new):
            s = s_new
            break
        ratio = abs(s_new / s - 1.0)
        s = s_new
        if ratio < eps1:
            converged = True
            break
    return s, steps, converged


@njit(cache=True)
def simple_s_irls(ytilde, x, kind, c0, c1, c2, delta, beta_init, s_init,
                  eps1, eps2, max_i_steps, max_m_steps):
    """One coordinate's S-regression by IRLS.

    Alternates weighted LS of ytilde on x with an M-scale refresh of the new
    residuals. The stopping rule compares consecutive residual vectors
    (max abs change < eps2), not coefficients. Returns
    (slope, intercept, scale, residuals, i_steps, status).
    """
    n = ytilde.size
    ymax = 0.0
    xmax = 0.0
    for i in range(n):
        ay = abs(ytilde[i])
        if ay > ymax:
            ymax = ay
        ax = abs(x[i])
        if ax > xmax:
            xmax = ax

    res = np.empty(n, dtype=np.float64)
    for i in range(n):
        res[i] = ytilde[i] - x[i] * beta_init
    med = np.median(res)
    max_res = 0.0
    for i in range(n):
        res[i] -= med
        if abs(res[i]) > max_res:
            max_res = abs(res[i])
    # residuals at machine epsilon of the data scale are an exact fit
    if max_res <= 1e-13 * (ymax + abs(beta_init) * xmax + abs(med)):
        return beta_init, med, 0.0, res, 0, STATUS_EXACT

    # initial weights come from the previous coordinate-descent scale
    w = np.empty(n, dtype=np.float64)
    sw0 = s_init
    if sw0 <= 0.0:
        sw0 = 1.4826 * np.median(np.abs(res))
        if sw0 == 0.0:
            sw0 = 1.4826 * np.mean(np.abs(res))
    for i in range(n):
        w[i] = w1(res[i] / sw0, kind, c0, c1, c2)

    beta = beta_init
    alpha = med
    s = s_init
    i_steps = 0
    status = STATUS_MAXITER

    while i_steps < max_i_steps:
        i_steps += 1

        sw = 0.0
        swx = 0.0
        swy = 0.0
        for i in range(n):
            sw += w[i]
            swx += w[i] * x[i]
            swy += w[i] * ytilde[i]
        if sw <= 0.0:
            status = STATUS_ALL_WEIGHTS_ZERO
            break
        xm = swx / sw
        ym = swy / sw
        sxx = 0.0
        sxy = 0.0
        for i in range(n):
            dx = x[i] - xm
            sxx += w[i] * dx * dx
            sxy += w[i] * dx * (ytilde[i] - ym)
        if sxx <= 0.0:
            status = STATUS_DEGENERATE
            break
        beta_new = sxy / sxx
        alpha_new = ym - beta_new * xm

        res_new = np.empty(n, dtype=np.float64)
        max_res = 0.0
        delta_res = 0.0
        for i in range(n):
            res_new[i] = ytilde[i] - x[i] * beta_new - alpha_new
            if abs(res_new[i]) > max_res:
                max_res = abs(res_new[i])
            d = abs(res_new[i] - res[i])
            if d > delta_res:
                delta_res = d
        if max_res <= 1e-13 * (ymax + abs(beta_new) * xmax + abs(alpha_new)):
            return beta_new, alpha_new, 0.0, res_new, i_steps, STATUS_EXACT

        if i_steps == 1:
            s0 = 1.4826 * np.median(np.abs(res_new))
            if s0 == 0.0:
                # more than half the residuals vanish; restart from the mean
                s0 = 1.4826 * np.mean(np.abs(res_new))
        else:
            s0 = s
        s, _, _ = mscale_fixed_point(res_new, kind, c0, c1, c2, delta,
                                     s0, eps1, max_m_steps)
        if s <= 0.0 or not np.isfinite(s):
            beta = beta_new
            alpha = alpha_new
            res = res_new
            status = STATUS_DEGENERATE
            break

        for i in range(n):
            w[i] = w1(res_new[i] / s, kind, c0, c1, c2)

        beta = beta_new
        alpha = alpha_new
        res = res_new
        if delta_res < eps2:
            status = STATUS_CONVERGED
            break

    return beta, alpha, s, res, i_steps, status
