"""Synthetic-data generation, contamination injectors, metrics, and the
seeded replicate harness behind the simulation and real-data benchmarks."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import ls_fit, mm_fit, s_fit
from .data import RegressionData
from .errors import CellshotError, DegenerateResponseError
from .rho import tune_for_bdp
from .shooting import ShootingConfig, mad, shooting_fit

ESTIMATOR_NAMES = ("ls", "s", "mm", "shooting-bi", "shooting-skh")

# cellwise schemes: (mean, sd) of the replacement normal
CELL_SCHEMES = {"dense": (50.0, 1.0), "scattered": (0.0, 100.0),
                "wide": (50.0, 10.0)}
# rowwise schemes: (mean, covariance multiplier)
ROW_SCHEMES = {"dense": (50.0, 1.0), "scattered": (0.0, 100.0),
               "wide": (50.0, 10.0)}

TABLES = {
    "cell_uncorr": ("cellwise", False),
    "cell_corr": ("cellwise", True),
    "row_corr": ("rowwise", True),
    "vertical_corr": ("vertical", True),
}


@dataclass(frozen=True)
class SimDesign:
    """Regression design: beta_j = j/p, normal predictors and errors."""

    n: int = 100
    p: int = 15
    correlated: bool = False
    beta_true: np.ndarray = None
    sigma_err: float = None
    cov: np.ndarray = None

    def __post_init__(self):
        p = self.p
        if self.beta_true is None:
            object.__setattr__(self, "beta_true",
                               np.arange(1, p + 1, dtype=np.float64) / p)
        if self.sigma_err is None:
            object.__setattr__(self, "sigma_err",
                               0.81 if self.correlated else 0.5)
        if self.cov is None:
            if self.correlated:
                ij = np.arange(p)
                cov = 0.5 ** np.abs(ij[:, None] - ij[None, :])
            else:
                cov = np.eye(p)
            object.__setattr__(self, "cov", cov)

    @property
    def signal_to_noise(self):
        return float(np.sqrt(self.beta_true @ self.cov @ self.beta_true)
                     / self.sigma_err)


@dataclass(frozen=True)
class ContaminationScheme:
    mode: str            # cellwise | rowwise | vertical
    eps: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.eps < 1.0:
            raise ValueError("eps must lie in [0, 1)")
        if self.mode not in ("cellwise", "rowwise", "vertical"):
            raise ValueError(f"unknown contamination mode {self.mode!r}")


def round_half_away(x: float) -> int:
    """Round positive fractions half away from zero."""
    return int(np.floor(x + 0.5))


def _subseed(*parts) -> int:
    """Deterministic 64-bit child seed from integer path components."""
    ss = np.random.SeedSequence([int(p) & 0x7FFFFFFF for p in parts])
    return int(ss.generate_state(1, np.uint64)[0])


def gen_clean(design: SimDesign, seed: int) -> RegressionData:
    """Draw X from the design's normal and y = X beta + e."""
    rng = np.random.default_rng(seed)
    L = np.linalg.cholesky(design.cov)
    X = rng.standard_normal((design.n, design.p)) @ L.T
    e = design.sigma_err * rng.standard_normal(design.n)
    y = X @ design.beta_true + e
    return RegressionData(y, X)


def contaminate_cellwise(data: RegressionData, eps: float, scheme: str,
                         seed: int) -> RegressionData:
    """Replace a random eps-fraction of design cells by scheme draws."""
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    mean, sd = CELL_SCHEMES[scheme]
    out = data.X.copy()
    m = round_half_away(eps * data.n * data.p)
    if m > 0:
        rng = np.random.default_rng(seed)
        cells = rng.choice(data.n * data.p, size=m, replace=False)
        out.flat[cells] = rng.normal(mean, sd, size=m)
    return RegressionData(data.y.copy(), out, list(data.column_names),
                          data.response_name)


def contaminate_rowwise(data: RegressionData, eps: float, scheme: str,
                        cov, seed: int) -> RegressionData:
    """Replace a random eps-fraction of whole rows of X by scheme draws."""
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    mean, mult = ROW_SCHEMES[scheme]
    out = data.X.copy()
    m = round_half_away(eps * data.n)
    if m > 0:
        rng = np.random.default_rng(seed)
        rows = rng.choice(data.n, size=m, replace=False)
        L = np.linalg.cholesky(np.asarray(cov, dtype=np.float64))
        out[rows] = mean + mult * (rng.standard_normal((m, data.p)) @ L.T)
    return RegressionData(data.y.copy(), out, list(data.column_names),
                          data.response_name)


def contaminate_vertical(design: SimDesign, data: RegressionData, eps: float,
                         seed: int) -> RegressionData:
    """Rebuild an eps-fraction of responses with errors shifted to mean 50."""
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    y = data.y.copy()
    m = round_half_away(eps * data.n)
    if m > 0:
        rng = np.random.default_rng(seed)
        rows = rng.choice(data.n, size=m, replace=False)
        e_cont = rng.normal(50.0, design.sigma_err, size=m)
        y[rows] = data.X[rows] @ design.beta_true + e_cont
    return RegressionData(y, data.X.copy(), list(data.column_names),
                          data.response_name)


def n_mse(estimates, beta_true, n: int) -> float:
    """n * mean over coefficients and replicates of squared estimation error."""
    if len(estimates) == 0:
        raise ValueError("need at least one replicate estimate")
    B = np.asarray(estimates, dtype=np.float64)
    beta_true = np.asarray(beta_true, dtype=np.float64)
    if B.ndim != 2 or B.shape[1] != beta_true.size:
        raise ValueError("estimate vectors must all have length p")
    return float(n * np.mean((B - beta_true[None, :]) ** 2))


def and_metric(estimates, beta_full, X, y) -> float:
    """Average norm distance between replicate slopes and the full-data
    slopes, with each coordinate scaled by MAD(x_j)/MAD(y)."""
    if len(estimates) == 0:
        raise ValueError("need at least one replicate estimate")
    B = np.asarray(estimates, dtype=np.float64)
    beta_full = np.asarray(beta_full, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    mad_y = mad(y)
    if mad_y == 0.0:
        raise DegenerateResponseError("response has zero MAD")
    mad_x = np.array([mad(X[:, j]) for j in range(X.shape[1])])
    zero = np.nonzero(mad_x == 0.0)[0]
    if zero.size:
        raise ValueError(f"zero MAD in design columns {zero.tolist()}")
    scaled = (B - beta_full[None, :]) * (mad_x / mad_y)[None, :]
    return float(np.mean(np.sqrt(np.mean(scaled ** 2, axis=1))))


def shooting_config_for(kind: str, seed: int) -> ShootingConfig:
    return ShootingConfig(spec=tune_for_bdp(kind, 0.20), init_seed=seed)


def fit_slopes(name: str, data: RegressionData, seed: int) -> np.ndarray:
    """Fit one named estimator and return its slope vector."""
    if name == "ls":
        return ls_fit(data).slopes
    if name == "s":
        return s_fit(data, tune_for_bdp("biweight", 0.20), seed=seed).slopes
    if name == "mm":
        return mm_fit(data, bdp=0.5, eff=0.95, seed=seed).slopes
    if name == "shooting-bi":
        return shooting_fit(data, shooting_config_for("biweight", seed)).slopes
    if name == "shooting-skh":
        return shooting_fit(data,
                            shooting_config_for("skipped_huber", seed)).slopes
    raise ValueError(f"unknown estimator {name!r}")


@dataclass
class ExperimentReport:
    metric: str
    table: str
    estimators: list
    schemes: list
    columns: list
    values: dict       # scheme -> estimator -> list aligned with columns
    failures: dict     # scheme -> estimator -> failure counts per column
    replicates: int
    seed: int
    descriptor: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "metric": self.metric,
            "table": self.table,
            "estimators": list(self.estimators),
            "schemes": list(self.schemes),
            "columns": list(self.columns),
            "values": self.values,
            "failures": self.failures,
            "replicates": self.replicates,
            "seed": self.seed,
            "descriptor": self.descriptor,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_wide_csv(self) -> str:
        # paper layout: one row per (scheme, estimator), one column per eps
        lines = ["scheme,estimator," + ",".join(self.columns)]
        for scheme in self.schemes:
            for est in self.estimators:
                vals = ",".join("%.4f" % v if v == v else "nan"
                                for v in self.values[scheme][est])
                lines.append(f"{scheme},{est},{vals}")
        return "\n".join(lines) + "\n"

    def to_tidy_csv(self) -> str:
        lines = ["scheme,estimator,column,value,failures,replicates"]
        for scheme in self.schemes:
            for est in self.estimators:
                for col, v, f in zip(self.columns, self.values[scheme][est],
                                     self.failures[scheme][est]):
                    lines.append(f"{scheme},{est},{col},{v!r},{f},"
                                 f"{self.replicates - f}")
        return "\n".join(lines) + "\n"


def thread_count() -> int:
    value = os.environ.get("CELLSHOT_THREADS", "")
    if not value:
        return 1
    return max(1, int(value))


def _map_jobs(worker, jobs):
    k = thread_count()
    if k <= 1 or len(jobs) <= 1:
        return [worker(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=k) as pool:
        return list(pool.map(worker, jobs))


def _table_replicate(job):
    (table, design, schemes, eps_grid, estimators, seed, r) = job
    mode, _ = TABLES[table]
    clean = gen_clean(design, _subseed(seed, r, 0))
    out = {}
    for si, scheme in enumerate(schemes):
        for ei, eps in enumerate(eps_grid):
            cont_seed = _subseed(seed, r, 1 + si * 1000 + ei)
            if eps == 0.0:
                cont = clean
            elif mode == "cellwise":
                cont = contaminate_cellwise(clean, eps, scheme, cont_seed)
            elif mode == "rowwise":
                cont = contaminate_rowwise(clean, eps, scheme, design.cov,
                                           cont_seed)
            else:
                cont = contaminate_vertical(design, clean, eps, cont_seed)
            for ki, name in enumerate(estimators):
                est_seed = _subseed(seed, r, 500000 + ki)
                try:
                    slopes = fit_slopes(name, cont, est_seed)
                except (CellshotError, np.linalg.LinAlgError):
                    slopes = None
                out[(scheme, eps, name)] = slopes
    return out


def run_table(table: str, estimators, eps_grid, R: int, seed: int,
              schemes=None, design: SimDesign | None = None) -> ExperimentReport:
    """Run R seeded replicates of one simulation table and aggregate n*MSE.

    Each replicate draws a fresh clean dataset that is shared across every
    (scheme, eps) cell; failed fits are excluded with a recorded count.
    """
    if table not in TABLES:
        raise ValueError(f"unknown table {table!r}")
    estimators = list(estimators)
    if not estimators or R < 1:
        raise ValueError("need at least one estimator and one replicate")
    mode, correlated = TABLES[table]
    if design is None:
        design = SimDesign(correlated=correlated)
    if mode == "vertical":
        schemes = ["vertical"]
    elif schemes is None:
        schemes = list(CELL_SCHEMES if mode == "cellwise" else ROW_SCHEMES)
    else:
        schemes = list(schemes)
    eps_grid = [float(e) for e in eps_grid]

    jobs = [(table, design, schemes, eps_grid, estimators, seed, r)
            for r in range(R)]
    results = _map_jobs(_table_replicate, jobs)

    values = {sch: {est: [] for est in estimators} for sch in schemes}
    failures = {sch: {est: [] for est in estimators} for sch in schemes}
    for scheme in schemes:
        for est in estimators:
            for eps in eps_grid:
                fits = [res[(scheme, eps, est)] for res in results]
                good = [f for f in fits if f is not None]
                failures[scheme][est].append(len(fits) - len(good))
                if good:
                    values[scheme][est].append(
                        n_mse(good, design.beta_true, design.n))
                else:
                    values[scheme][est].append(float("nan"))
    return ExperimentReport(
        metric="n_mse", table=table, estimators=estimators, schemes=schemes,
        columns=[f"eps={e:g}" for e in eps_grid], values=values,
        failures=failures, replicates=R, seed=seed,
        descriptor={"n": design.n, "p": design.p,
                    "correlated": design.correlated,
                    "sigma_err": design.sigma_err, "mode": mode})


def _full_fits(data, estimators, seed):
    est_seeds = {name: _subseed(seed, 900000 + ki)
                 for ki, name in enumerate(estimators)}
    full = {name: fit_slopes(name, data, est_seeds[name])
            for name in estimators}
    return full, est_seeds


def _resample_replicate(job):
    data, estimators, est_seeds, seed, r, m = job
    rng = np.random.default_rng(_subseed(seed, r, 2))
    rows = np.sort(rng.choice(data.n, size=m, replace=False))
    sub = data.subset(rows)
    out = {}
    for name in estimators:
        try:
            out[name] = fit_slopes(name, sub, est_seeds[name])
        except (CellshotError, np.linalg.LinAlgError):
            out[name] = None
    return out


def _contaminate_replicate(job):
    data, estimators, est_seeds, seed, r, eps, shift, mu, sigma = job
    rng = np.random.default_rng(_subseed(seed, r, 3))
    X = data.X.copy()
    m = round_half_away(eps * data.n * data.p)
    if m > 0:
        cells = rng.choice(data.n * data.p, size=m, replace=False)
        cols = cells % data.p
        X.flat[cells] = rng.normal(mu[cols] + shift * sigma[cols], sigma[cols])
    cont = RegressionData(data.y.copy(), X, list(data.column_names),
                          data.response_name)
    out = {}
    for name in estimators:
        try:
            out[name] = fit_slopes(name, cont, est_seeds[name])
        except (CellshotError, np.linalg.LinAlgError):
            out[name] = None
    return out


def _collect_and(data, estimators, results, full, R, seed, label, descriptor):
    values = {label: {}}
    failures = {label: {}}
    for name in estimators:
        good = [res[name] for res in results if res[name] is not None]
        failures[label][name] = [R - len(good)]
        if good:
            values[label][name] = [and_metric(good, full[name],
                                              data.X, data.y)]
        else:
            values[label][name] = [float("nan")]
    return ExperimentReport(
        metric="and", table=label, estimators=list(estimators),
        schemes=[label], columns=["and"], values=values, failures=failures,
        replicates=R, seed=seed, descriptor=descriptor)


def real_data_resample(data: RegressionData, R: int, frac: float = 0.8,
                       estimators=ESTIMATOR_NAMES,
                       seed: int = 0) -> ExperimentReport:
    """Refit each estimator on R random row subsets and report the AND
    against its own full-data fit."""
    if not 0.0 < frac <= 1.0:
        raise ValueError("frac must lie in (0, 1]")
    m = round_half_away(frac * data.n)
    if m <= data.p + 1:
        raise ValueError("subset size must exceed p + 1")
    estimators = list(estimators)
    full, est_seeds = _full_fits(data, estimators, seed)
    jobs = [(data, estimators, est_seeds, seed, r, m) for r in range(R)]
    results = _map_jobs(_resample_replicate, jobs)
    return _collect_and(data, estimators, results, full, R, seed,
                        "observed", {"mode": "resample", "frac": frac,
                                     "n": data.n, "p": data.p})


def real_data_contaminate(data: RegressionData, eps: float = 0.05,
                          shift: float = 10.0, R: int = 100,
                          estimators=ESTIMATOR_NAMES,
                          seed: int = 0) -> ExperimentReport:
    """Contaminate an eps-fraction of design cells with draws from
    N(median_j + shift * MAD_j, MAD_j^2) and report the AND of each
    estimator against its fit on the original data."""
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    estimators = list(estimators)
    full, est_seeds = _full_fits(data, estimators, seed)
    mu = np.median(data.X, axis=0)
    sigma = np.array([mad(data.X[:, j]) for j in range(data.p)])
    jobs = [(data, estimators, est_seeds, seed, r, eps, shift, mu, sigma)
            for r in range(R)]
    results = _map_jobs(_contaminate_replicate, jobs)
    return _collect_and(data, estimators, results, full, R, seed,
                        "contaminated", {"mode": "contaminate", "eps": eps,
                                         "shift": shift, "n": data.n,
                                         "p": data.p})
