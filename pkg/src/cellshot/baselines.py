"""Reference estimators: least squares, fast-S, and MM regression."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .data import RegressionData
from .errors import DegenerateDesignError, EstimationError
from .mscale import solve_mscale
from .rho import RhoSpec, irls_weight, rho_eval, tune_for_bdp, tune_for_efficiency

FAST_S_SUBSAMPLES = 500
FAST_S_REFINE_STEPS = 2
FAST_S_BEST = 5


@dataclass(frozen=True)
class LinearFit:
    slopes: np.ndarray
    intercept: float
    scale: float
    method: str


def _design(data: RegressionData):
    return np.column_stack([np.ones(data.n), data.X])


def ls_fit(data: RegressionData) -> LinearFit:
    """Ordinary least squares; scale is the RMS residual."""
    Xd = _design(data)
    coef, _, rank, _ = np.linalg.lstsq(Xd, data.y, rcond=None)
    if rank < Xd.shape[1]:
        raise DegenerateDesignError(
            f"design with intercept has rank {rank} < {Xd.shape[1]}")
    res = data.y - Xd @ coef
    scale = float(np.sqrt(np.mean(res ** 2)))
    return LinearFit(coef[1:], float(coef[0]), scale, "ls")


def _batched_solve(A, rhs):
    """Solve a stack of small linear systems, returning NaN rows for the
    singular members instead of failing the whole batch."""
    try:
        return np.linalg.solve(A, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.full(rhs.shape, np.nan)
        for m in range(A.shape[0]):
            try:
                out[m] = np.linalg.solve(A[m], rhs[m])
            except np.linalg.LinAlgError:
                pass
        return out


def _batch_mscale(R, spec, s0, eps1=1e-4, cap=25):
    # approximate candidate scales for ranking only; the kept candidates are
    # refined with a fully converged M-scale afterwards
    s = s0.copy()
    for _ in range(cap):
        Z = R / s[:, None]
        s_new = s * np.sqrt(np.mean(rho_eval(spec, Z), axis=1) / spec.delta)
        ratio = np.abs(s_new / s - 1.0)
        s = s_new
        if np.all(ratio < eps1):
            break
    return s


def _wls_solve(Xd, y, w):
    A = Xd.T @ (w[:, None] * Xd)
    b = Xd.T @ (w * y)
    return np.linalg.solve(A, b)


def _exact_rows(R, y, B, Xd):
    # residuals at machine epsilon of the data scale are an exact fit
    ref = np.max(np.abs(y)) + np.max(np.abs(B), axis=-1) * np.max(np.abs(Xd))
    return np.max(np.abs(R), axis=-1) <= 1e-13 * ref


def _irls_refine(y, Xd, spec, beta, s, max_iter=60, tol=1e-8):
    """IRLS for the S estimating equations with the M-scale refreshed each
    step (warm-started). Returns (beta, scale, iterations)."""
    for it in range(1, max_iter + 1):
        res = y - Xd @ beta
        if _exact_rows(res[None, :], y, beta[None, :], Xd)[0]:
            return beta, 0.0, it
        sol = solve_mscale(res, spec, s0=s if s > 0 else None)
        s = sol.s
        if s <= 0.0:
            return beta, 0.0, it
        w = irls_weight(spec, res / s)
        try:
            coef = _wls_solve(Xd, y, w)
        except np.linalg.LinAlgError:
            break
        step = np.max(np.abs(coef - beta))
        beta = coef
        if step < tol * (1.0 + np.max(np.abs(beta))):
            break
    res = y - Xd @ beta
    s = solve_mscale(res, spec, s0=s if s > 0 else None).s
    return beta, s, it


def _fast_s(y, Xd, spec, n_subsamples, k_refine, n_best, rng):
    """Subsampling S-estimator core. Returns the winning coefficient vector,
    its M-scale, and the fully refined candidate scales."""
    n, q = Xd.shape
    idx = np.empty((n_subsamples, q), dtype=np.int64)
    for m in range(n_subsamples):
        idx[m] = rng.choice(n, size=q, replace=False)
    B = _batched_solve(Xd[idx], y[idx])
    B = B[np.all(np.isfinite(B), axis=1)]
    if B.shape[0] == 0:
        raise EstimationError("all elemental subsamples were degenerate")

    R = y[None, :] - B @ Xd.T
    exact = _exact_rows(R, y, B, Xd)
    if exact.any():
        beta = B[int(np.argmax(exact))]
        return beta, 0.0, [0.0]

    s = 1.4826 * np.median(np.abs(R), axis=1)
    flat = s == 0.0
    if flat.any():
        s[flat] = 1.4826 * np.mean(np.abs(R[flat]), axis=1)

    for _ in range(k_refine):
        s = s * np.sqrt(np.mean(rho_eval(spec, R / s[:, None]), axis=1)
                        / spec.delta)
        W = irls_weight(spec, R / s[:, None])
        WX = W[:, :, None] * Xd[None, :, :]
        A = np.swapaxes(WX, 1, 2) @ Xd
        rhs = (W * y[None, :]) @ Xd
        B_new = _batched_solve(A, rhs)
        ok = np.all(np.isfinite(B_new), axis=1)
        B = np.where(ok[:, None], B_new, B)
        R = y[None, :] - B @ Xd.T
        exact = _exact_rows(R, y, B, Xd)
        if exact.any():
            beta = B[int(np.argmax(exact))]
            return beta, 0.0, [0.0]
        med = 1.4826 * np.median(np.abs(R), axis=1)
        s = np.where(s > 0.0, s, np.maximum(med, 1e-300))

    scales = _batch_mscale(R, spec, s)
    order = np.argsort(scales, kind="stable")[:n_best]

    refined = []
    for m in order:
        beta_m, s_m, _ = _irls_refine(y, Xd, spec, B[m].copy(), scales[m])
        refined.append((s_m, beta_m))
    refined_scales = [s_m for s_m, _ in refined]
    best = int(np.argmin(refined_scales))
    return refined[best][1], refined[best][0], refined_scales


def _df_corrected(spec, n, q):
    # the minimized M-scale overfits when q/n is non-negligible; shrinking
    # delta by (n - q)/n is the usual degrees-of-freedom consistency fix
    return dataclasses.replace(spec, delta=spec.delta * (n - q) / n)


def s_fit(data: RegressionData, spec: RhoSpec,
          n_subsamples: int = FAST_S_SUBSAMPLES,
          k_refine: int = FAST_S_REFINE_STEPS,
          seed: int = 0, n_best: int = FAST_S_BEST,
          df_correct: bool = True) -> LinearFit:
    """Fast-S regression: random elemental starts, short IRLS improvement,
    full refinement of the best candidates; deterministic given the seed."""
    if data.n <= data.p + 1:
        raise EstimationError("need n > p + 1 observations")
    if df_correct:
        spec = _df_corrected(spec, data.n, data.p + 1)
    rng = np.random.default_rng(seed)
    beta, scale, _ = _fast_s(data.y, _design(data), spec,
                             n_subsamples, k_refine, n_best, rng)
    return LinearFit(beta[1:], float(beta[0]), float(scale), "s")


def mm_fit(data: RegressionData, bdp: float = 0.5, eff: float = 0.95,
           seed: int = 0, kind: str = "biweight",
           n_subsamples: int = FAST_S_SUBSAMPLES,
           k_refine: int = FAST_S_REFINE_STEPS,
           df_correct: bool = True) -> LinearFit:
    """MM regression: S-stage at the requested breakdown point for the scale,
    then IRLS M-regression at the requested efficiency with the scale fixed."""
    chi_spec = tune_for_bdp(kind, bdp)
    psi_spec = tune_for_efficiency(kind, eff)
    s_stage = s_fit(data, chi_spec, n_subsamples, k_refine, seed,
                    df_correct=df_correct)
    if s_stage.scale == 0.0:
        return LinearFit(s_stage.slopes, s_stage.intercept, 0.0, "mm")

    Xd = _design(data)
    y = data.y
    s = s_stage.scale
    beta = np.concatenate([[s_stage.intercept], s_stage.slopes])
    for _ in range(100):
        res = y - Xd @ beta
        w = irls_weight(psi_spec, res / s)
        try:
            coef = _wls_solve(Xd, y, w)
        except np.linalg.LinAlgError as exc:
            raise EstimationError("M-stage weighted design lost rank") from exc
        step = np.max(np.abs(coef - beta))
        beta = coef
        if step < 1e-9 * (1.0 + np.max(np.abs(beta))):
            break
    return LinearFit(beta[1:], float(beta[0]), float(s), "mm")
