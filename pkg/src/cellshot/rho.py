"""Bounded loss families (biweight, skipped Huber, lqq) and their tuning.

A `RhoSpec` bundles a rho-function with its tuning constants, the supremum
rho(inf), and delta = E[rho(Z)] for standard normal Z. The implied breakdown
point of the derived M-scale is delta / rho(inf).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.stats import norm

from . import _kernels as _k
from .errors import CalibrationError

_KIND_CODES = {
    "biweight": _k.KIND_BIWEIGHT,
    "skipped_huber": _k.KIND_SKIPPED_HUBER,
    "lqq": _k.KIND_LQQ,
}

# Shape of the lqq family: descending-slope parameter s and the ratio b/c are
# held fixed (minimal slope -0.5, b = 1.5c); only the overall width c is tuned.
LQQ_SLOPE = 1.5
LQQ_B_OVER_C = 1.5

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-13, limit=200)


@dataclass(frozen=True)
class RhoSpec:
    """A rho-function with tuning constants and normal-model calibration.

    kind: 'biweight' | 'skipped_huber' | 'lqq'
    constants: (k,) for biweight / skipped Huber, (b, c, s) for lqq
    delta: E[rho(Z)], Z ~ N(0,1)
    rho_sup: rho(inf)
    """

    kind: str
    constants: tuple
    delta: float
    rho_sup: float

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise ValueError(f"unknown rho kind {self.kind!r}")
        if any(c <= 0 for c in self.constants):
            raise ValueError("tuning constants must be positive")
        if not 0.0 < self.delta < self.rho_sup:
            raise ValueError("delta must lie strictly between 0 and rho_sup")

    @property
    def kind_code(self):
        return _KIND_CODES[self.kind]

    @property
    def coeffs(self):
        """Constants padded to the (c0, c1, c2) kernel signature."""
        c = self.constants + (0.0,) * (3 - len(self.constants))
        return float(c[0]), float(c[1]), float(c[2])

    @property
    def breakdown_point(self):
        return self.delta / self.rho_sup

    def support_breaks(self):
        """Abscissae where the piecewise definition changes (for quadrature)."""
        if self.kind == "lqq":
            b, c, s = self.constants
            a = (s * b - 2.0 * b - 2.0 * c) / (1.0 - s)
            return (c, b + c, b + c + a)
        return (self.constants[0],)


def rho_eval(spec: RhoSpec, z):
    """Evaluate rho; accepts scalars or arrays."""
    c0, c1, c2 = spec.coeffs
    arr = np.asarray(z, dtype=np.float64)
    out = _k.rho_vec(arr.ravel(), spec.kind_code, c0, c1, c2).reshape(arr.shape)
    return float(out) if np.isscalar(z) else out


def rho_prime(spec: RhoSpec, z):
    """Derivative of rho (the psi-function); odd, zero outside the support."""
    c0, c1, c2 = spec.coeffs
    arr = np.asarray(z, dtype=np.float64)
    out = _k.psi_vec(arr.ravel(), spec.kind_code, c0, c1, c2).reshape(arr.shape)
    return float(out) if np.isscalar(z) else out


def irls_weight(spec: RhoSpec, z):
    """rho'(z)/z with the continuous limit 1 at z = 0."""
    c0, c1, c2 = spec.coeffs
    arr = np.asarray(z, dtype=np.float64)
    out = _k.w_vec(arr.ravel(), spec.kind_code, c0, c1, c2).reshape(arr.shape)
    return float(out) if np.isscalar(z) else out


def hard_rejection_weight(r, c):
    """Hard-rejection weight: 1 for scaled residuals up to c, else 0."""
    if c <= 0:
        raise ValueError("cutoff must be positive")
    r_arr = np.asarray(r, dtype=np.float64)
    if np.any(r_arr < 0):
        raise ValueError("scaled residual magnitude must be non-negative")
    out = np.where(r_arr <= c, 1.0, 0.0)
    return float(out) if np.isscalar(r) else out


def _integrate_pieces(f, breaks):
    # symmetric integrand against the normal density; integrate each smooth
    # piece of [0, last break] separately, the tail is handled by callers
    total = 0.0
    pts = (0.0,) + tuple(breaks)
    for lo, hi in zip(pts[:-1], pts[1:]):
        val, _ = quad(f, lo, hi, **_QUAD_OPTS)
        total += 2.0 * val
    return total


def expected_rho_normal(spec: RhoSpec) -> float:
    """delta = E[rho(Z)] by piecewise Gauss-Kronrod quadrature plus the exact
    constant tail rho_sup * P(|Z| > support)."""
    c0, c1, c2 = spec.coeffs
    kc = spec.kind_code
    breaks = spec.support_breaks()
    body = _integrate_pieces(
        lambda z: _k.rho1(z, kc, c0, c1, c2) * norm.pdf(z), breaks)
    tail = spec.rho_sup * 2.0 * norm.sf(breaks[-1])
    return body + tail


def asymptotic_efficiency(spec: RhoSpec) -> float:
    """Normal-model efficiency E[psi(Z) Z]^2 / E[psi(Z)^2] of the location
    (equivalently regression) M-estimator with this psi."""
    c0, c1, c2 = spec.coeffs
    kc = spec.kind_code
    breaks = spec.support_breaks()
    b_val = _integrate_pieces(
        lambda z: _k.psi1(z, kc, c0, c1, c2) * z * norm.pdf(z), breaks)
    v_val = _integrate_pieces(
        lambda z: _k.psi1(z, kc, c0, c1, c2) ** 2 * norm.pdf(z), breaks)
    return b_val * b_val / v_val


def _sup_for(kind, k):
    if kind == "biweight":
        return k * k / 6.0
    return k * k / 2.0


def _lqq_constants(c):
    return (LQQ_B_OVER_C * c, c, LQQ_SLOPE)


def _lqq_sup(c):
    b, cc, s = _lqq_constants(c)
    a = (s * b - 2.0 * b - 2.0 * cc) / (1.0 - s)
    rb = 0.5 * (b + cc) ** 2 - s * b * b / 6.0
    h = cc + b - 0.5 * s * b
    return rb + h * a + (1.0 - s) * (0.5 * a * a - a * a / 6.0)


def make_spec(kind: str, constant: float) -> RhoSpec:
    """Build a spec from its primary width constant (k, or c for lqq)."""
    if kind == "lqq":
        constants = _lqq_constants(constant)
        rho_sup = _lqq_sup(constant)
    else:
        constants = (constant,)
        rho_sup = _sup_for(kind, constant)
    probe = RhoSpec(kind, constants, rho_sup / 2.0, rho_sup)
    return RhoSpec(kind, constants, expected_rho_normal(probe), rho_sup)


def _solve_constant(kind, target_fn, target, lo=0.02, hi=40.0):
    def f(c):
        return target_fn(make_spec(kind, c)) - target

    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise CalibrationError(
            f"target not bracketed for {kind} on [{lo}, {hi}]")
    return brentq(f, lo, hi, xtol=1e-12, rtol=8.9e-16)


@lru_cache(maxsize=64)
def tune_for_bdp(kind: str, bdp: float) -> RhoSpec:
    """Find the constant giving breakdown point delta/rho_sup == bdp."""
    if not 0.0 < bdp <= 0.5:
        raise ValueError("bdp must be in (0, 0.5]")
    c = _solve_constant(kind, lambda sp: sp.breakdown_point, bdp)
    return make_spec(kind, c)


@lru_cache(maxsize=64)
def tune_for_efficiency(kind: str, eff: float) -> RhoSpec:
    """Find the constant giving normal-model efficiency eff."""
    if not 0.5 < eff < 1.0:
        raise ValueError("efficiency must be in (0.5, 1)")
    c = _solve_constant(kind, asymptotic_efficiency, eff)
    return make_spec(kind, c)


def biweight(k: float) -> RhoSpec:
    return make_spec("biweight", k)


def skipped_huber(k: float) -> RhoSpec:
    return make_spec("skipped_huber", k)
