"""Shooting S-estimator: coordinate-descent S-regression over cleaned cells.

The fit Huberizes the predictors, seeds the loop with an MM regression on the
Huberized design, then cycles Gauss-Seidel over the columns: partial response,
simple S-regression on the raw column, calibration of suspect cells, cell
weighting, and convex-combination cleaning. Per-variable scales drive both the
cell weights and the outer stopping rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .baselines import mm_fit
from .data import RegressionData
from .errors import DegenerateResponseError, InitializationError
from .mscale import M_STEP_CAP
from .rho import RhoSpec, hard_rejection_weight, tune_for_bdp
from .univariate import I_STEP_CAP, simple_s_fit

DEFAULT_BDP = 0.20
DEFAULT_CUTOFF = 3.0


def mad(values) -> float:
    """Normalized MAD: 1.4826 * median |v - median(v)|."""
    v = np.asarray(values, dtype=np.float64)
    med = np.median(v)
    return 1.4826 * float(np.median(np.abs(v - med)))


@dataclass(frozen=True)
class ShootingConfig:
    spec: RhoSpec
    cutoff_c: float = DEFAULT_CUTOFF
    eps1: float = 1e-6
    eps2_factor: float = 1e-6
    eps3_factor: float = 1e-4
    eps4_factor: float = 1e-2
    max_outer_loops: int = 50
    max_i_steps: int = I_STEP_CAP
    max_m_steps: int = M_STEP_CAP
    init_seed: int = 0
    # calibration fallback when |slope_j| < eps3: impute the column median
    # (the operational choice) or zero
    impute_fallback: str = "median"
    # optional weight function on |res|/s; None means hard rejection at cutoff_c
    weight_fn: Callable | None = None

    def __post_init__(self):
        for name in ("cutoff_c", "eps1", "eps2_factor", "eps3_factor",
                     "eps4_factor"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.impute_fallback not in ("median", "zero"):
            raise ValueError("impute_fallback must be 'median' or 'zero'")


def default_config(kind: str = "biweight", bdp: float = DEFAULT_BDP,
                   **kwargs) -> ShootingConfig:
    return ShootingConfig(spec=tune_for_bdp(kind, bdp), **kwargs)


@dataclass(frozen=True)
class ShootingFit:
    slopes: np.ndarray
    intercept: float
    scales: np.ndarray
    weights: np.ndarray
    cleaned_x: np.ndarray
    outer_loops: int
    converged: bool
    init_slopes: np.ndarray
    scale_change_trace: tuple = field(default_factory=tuple)


def huberize_columns(X) -> np.ndarray:
    """Clamp each column to median +/- 2 * MAD (normalized MAD)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("X must be a matrix with at least two rows")
    out = X.copy()
    for j in range(X.shape[1]):
        med = np.median(X[:, j])
        band = 2.0 * mad(X[:, j])
        np.clip(X[:, j], med - band, med + band, out=out[:, j])
    return out


def initial_fit(X0, y, seed: int = 0):
    """MM regression of y on the Huberized predictors with the lqq loss
    (50% breakdown, 95% efficiency). Returns (slopes, intercept, scale)."""
    X0 = np.asarray(X0, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X0.shape
    if n <= p + 1:
        raise InitializationError("need n > p + 1 observations")
    constant = [j for j in range(p) if np.ptp(X0[:, j]) == 0.0]
    if constant:
        raise InitializationError(
            "Huberized design has constant columns: "
            + ", ".join(str(j) for j in constant))
    centered = X0 - X0.mean(axis=0)
    rank = np.linalg.matrix_rank(centered)
    if rank < p:
        _, _, piv = scipy.linalg.qr(centered, mode="economic", pivoting=True)
        dependent = sorted(int(j) for j in piv[rank:])
        raise InitializationError(
            "Huberized design is rank deficient; dependent columns: "
            + ", ".join(str(j) for j in dependent))
    fit = mm_fit(RegressionData(y, X0), bdp=0.5, eff=0.95, seed=seed,
                 kind="lqq")
    return fit.slopes, fit.intercept, fit.scale


def partial_response(y, cleaned_prev, cleaned_curr, slopes_prev, slopes_curr,
                     j: int) -> np.ndarray:
    """Gauss-Seidel partial residual for column j: subtract current-loop
    contributions for k < j and previous-loop contributions for k > j."""
    y = np.asarray(y, dtype=np.float64)
    out = y.copy()
    if j > 0:
        out -= np.asarray(cleaned_curr)[:, :j] @ np.asarray(slopes_curr)[:j]
    p = np.asarray(cleaned_prev).shape[1]
    if j < p - 1:
        out -= (np.asarray(cleaned_prev)[:, j + 1:]
                @ np.asarray(slopes_prev)[j + 1:])
    return out


def impute_cells(ytilde_j, alpha_j, beta_j, x_j, eps3,
                 fallback: str = "median") -> np.ndarray:
    """Calibrated cell values (ytilde - alpha)/beta, or the column fallback
    for every cell when |beta| < eps3."""
    ytilde_j = np.asarray(ytilde_j, dtype=np.float64)
    x_j = np.asarray(x_j, dtype=np.float64)
    if eps3 <= 0:
        raise ValueError("eps3 must be positive")
    if abs(beta_j) < eps3:
        fill = np.median(x_j) if fallback == "median" else 0.0
        return np.full_like(ytilde_j, fill)
    return (ytilde_j - alpha_j) / beta_j


def update_cell_weights(residuals, s_j, cutoff_c,
                        weight_fn: Callable | None = None) -> np.ndarray:
    """Cell weights w(|res|/s_j); an exact fit (s_j = 0) keeps every cell."""
    residuals = np.asarray(residuals, dtype=np.float64)
    if s_j < 0:
        raise ValueError("scale must be non-negative")
    if s_j == 0.0:
        return np.ones_like(residuals)
    scaled = np.abs(residuals) / s_j
    if weight_fn is None:
        return hard_rejection_weight(scaled, cutoff_c)
    w = np.asarray(weight_fn(scaled), dtype=np.float64)
    if np.any((w < 0) | (w > 1)):
        raise ValueError("weight function must map into [0, 1]")
    return w


def clean_column(x_j, xhat_j, w_j) -> np.ndarray:
    """Convex combination w*x + (1-w)*xhat of observed and calibrated cells."""
    x_j = np.asarray(x_j, dtype=np.float64)
    xhat_j = np.asarray(xhat_j, dtype=np.float64)
    w_j = np.asarray(w_j, dtype=np.float64)
    if np.any((w_j < 0) | (w_j > 1)):
        raise ValueError("weights must lie in [0, 1]")
    return w_j * x_j + (1.0 - w_j) * xhat_j


def shooting_fit(data: RegressionData, config: ShootingConfig) -> ShootingFit:
    """Run the full coordinate-descent S-estimation loop."""
    y = data.y
    X = data.X
    n, p = X.shape
    if n <= 2:
        raise ValueError("need more than two observations")

    mad_y = mad(y)
    if mad_y == 0.0:
        raise DegenerateResponseError(
            "response has zero MAD; scale-relative tolerances are undefined")
    eps2 = config.eps2_factor * mad_y
    eps4 = config.eps4_factor * mad_y
    # zero-MAD columns Huberize to constants, which initial_fit rejects,
    # so eps3 is well defined whenever the loop is reached
    mad_x = np.array([mad(X[:, j]) for j in range(p)])
    eps3 = np.full(p, np.inf)
    np.divide(config.eps3_factor * mad_y, mad_x, out=eps3, where=mad_x > 0)

    cleaned = huberize_columns(X)
    init_slopes, init_intercept, init_scale = initial_fit(
        cleaned, y, seed=config.init_seed)

    slopes = np.asarray(init_slopes, dtype=np.float64).copy()
    scales = np.full(p, init_scale, dtype=np.float64)
    weights = np.ones((n, p), dtype=np.float64)
    col_medians = np.median(X, axis=0)

    trace = []
    converged = False
    loops = 0
    while loops < config.max_outer_loops:
        loops += 1
        scales_prev = scales.copy()
        for j in range(p):
            x_j = X[:, j]
            # cleaned/slopes hold current-loop values for k < j and
            # previous-loop values for k >= j, so this is the mixed
            # Gauss-Seidel partial response
            ytilde = y - cleaned @ slopes + cleaned[:, j] * slopes[j]
            fit_j = simple_s_fit(
                ytilde, x_j, config.spec, slopes[j], scales[j],
                config.eps1, eps2,
                max_i_steps=config.max_i_steps,
                max_m_steps=config.max_m_steps)

            if abs(fit_j.slope) < eps3[j]:
                fill = (col_medians[j] if config.impute_fallback == "median"
                        else 0.0)
                xhat = np.full(n, fill)
            else:
                xhat = (ytilde - fit_j.intercept) / fit_j.slope
            w_j = update_cell_weights(fit_j.residuals, fit_j.scale,
                                      config.cutoff_c, config.weight_fn)
            slopes[j] = fit_j.slope
            scales[j] = fit_j.scale
            weights[:, j] = w_j
            cleaned[:, j] = w_j * x_j + (1.0 - w_j) * xhat

        change = float(np.sum(np.abs(scales - scales_prev)))
        trace.append(change)
        if change < eps4:
            converged = True
            break

    intercept = float(np.median(y - cleaned @ slopes))
    return ShootingFit(
        slopes=slopes,
        intercept=intercept,
        scales=scales.copy(),
        weights=weights,
        cleaned_x=cleaned,
        outer_loops=loops,
        converged=converged,
        init_slopes=np.asarray(init_slopes, dtype=np.float64),
        scale_change_trace=tuple(trace),
    )


def flag_outliers(fit: ShootingFit, threshold: float = 0.5):
    """Cells with weight below the threshold, and rows flagged as a whole
    when every one of their cells is flagged."""
    cell_flags = fit.weights < threshold
    row_flags = np.all(cell_flags, axis=1)
    return cell_flags, row_flags


def fit_defaults(data: RegressionData, kind: str = "biweight",
                 bdp: float = DEFAULT_BDP, cutoff: float = DEFAULT_CUTOFF,
                 seed: int = 0) -> ShootingFit:
    """Shooting fit with the reference tuning (bdp, hard rejection at c)."""
    cfg = ShootingConfig(spec=tune_for_bdp(kind, bdp), cutoff_c=cutoff,
                         init_seed=seed)
    return shooting_fit(data, cfg)
