"""Simple (one predictor plus intercept) S-regression via IRLS I-steps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .errors import DegenerateDesignError
from .mscale import M_STEP_CAP, solve_mscale
from .rho import RhoSpec

I_STEP_CAP = 100


@dataclass(frozen=True)
class SimpleSFit:
    slope: float
    intercept: float
    scale: float
    residuals: np.ndarray
    i_steps: int
    converged: bool


def weighted_ls_simple(y, x, w):
    """Closed-form weighted least squares of y on x with an intercept.

    Returns (slope, intercept). Raises DegenerateDesignError when the
    weighted variance of x vanishes.
    """
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if not (y.shape == x.shape == w.shape):
        raise ValueError("y, x, w must have equal lengths")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    sw = w.sum()
    if sw <= 0:
        raise ValueError("weights must not all be zero")
    xm = (w * x).sum() / sw
    ym = (w * y).sum() / sw
    dx = x - xm
    sxx = (w * dx * dx).sum()
    if sxx <= 0:
        raise DegenerateDesignError("zero weighted variance in predictor")
    slope = (w * dx * (y - ym)).sum() / sxx
    return slope, ym - slope * xm


def simple_s_fit(ytilde, x, spec: RhoSpec, beta_init: float, s_init: float,
                 eps1: float, eps2: float,
                 max_i_steps: int = I_STEP_CAP,
                 max_m_steps: int = M_STEP_CAP) -> SimpleSFit:
    """S-regression of ytilde on x starting from slope beta_init.

    Initial residuals are median-centered; initial IRLS weights use the
    caller-supplied scale s_init; thereafter each I-step's scale restarts
    from 1.4826 * median|res| on the first step and is warm-started after.
    Iteration stops when the residual vector changes by less than eps2 in
    max norm. An all-rejected weight vector flags non-convergence and
    returns the last iterate.
    """
    yt = np.ascontiguousarray(ytilde, dtype=np.float64)
    xv = np.ascontiguousarray(x, dtype=np.float64)
    if yt.shape != xv.shape or yt.ndim != 1:
        raise ValueError("ytilde and x must be equal-length vectors")
    c0, c1, c2 = spec.coeffs
    beta, alpha, s, res, i_steps, status = _k.simple_s_irls(
        yt, xv, spec.kind_code, c0, c1, c2, spec.delta,
        float(beta_init), float(s_init), float(eps1), float(eps2),
        max_i_steps, max_m_steps)
    if status == _k.STATUS_DEGENERATE:
        raise DegenerateDesignError(
            "weighted variance of the predictor vanished during IRLS")
    if status == _k.STATUS_ALL_WEIGHTS_ZERO and s <= 0.0:
        s = solve_mscale(res, spec).s
    converged = status in (_k.STATUS_CONVERGED, _k.STATUS_EXACT)
    return SimpleSFit(float(beta), float(alpha), float(s), res,
                      int(i_steps), converged)
