"""M-estimator of scale: (1/n) sum rho(r_i / s) = delta, solved by the
fixed-point M-step iteration s <- s * sqrt(sum rho(r/s) / (n delta))."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .rho import RhoSpec

M_STEP_CAP = 200


@dataclass(frozen=True)
class ScaleSolution:
    s: float
    m_steps: int
    converged: bool


def initial_scale(residuals) -> float:
    """1.4826 * median(|r|); falls back to 1.4826 * mean(|r|) when more than
    half the residuals are exactly zero but not all of them."""
    r = np.asarray(residuals, dtype=np.float64)
    if r.size == 0:
        raise ValueError("residual vector must be non-empty")
    s0 = 1.4826 * float(np.median(np.abs(r)))
    if s0 == 0.0 and np.any(r != 0.0):
        s0 = 1.4826 * float(np.mean(np.abs(r)))
    return s0


def solve_mscale(residuals, spec: RhoSpec, s0: float | None = None,
                 eps1: float = 1e-6, max_steps: int = M_STEP_CAP) -> ScaleSolution:
    """Solve the M-scale equation for the given residuals.

    s0 defaults to initial_scale(residuals). An all-zero residual vector is
    the exact-fit case and returns s = 0 immediately.
    """
    r = np.ascontiguousarray(residuals, dtype=np.float64)
    if r.size == 0:
        raise ValueError("residual vector must be non-empty")
    if not np.any(r != 0.0):
        return ScaleSolution(0.0, 0, True)
    if s0 is None:
        s0 = initial_scale(r)
    if s0 <= 0.0:
        raise ValueError("s0 must be positive")
    c0, c1, c2 = spec.coeffs
    s, steps, converged = _k.mscale_fixed_point(
        r, spec.kind_code, c0, c1, c2, spec.delta, float(s0),
        float(eps1), max_steps)
    return ScaleSolution(float(s), int(steps), bool(converged))
