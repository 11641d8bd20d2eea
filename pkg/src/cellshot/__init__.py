"""cellshot: shooting S-estimation for regression with cellwise outliers."""

from .baselines import LinearFit, ls_fit, mm_fit, s_fit
from .data import RegressionData, load_csv
from .errors import (CalibrationError, CellshotError, DegenerateDesignError,
                     DegenerateResponseError, EstimationError, IngestionError,
                     InitializationError)
from .mscale import ScaleSolution, initial_scale, solve_mscale
from .rho import (RhoSpec, biweight, expected_rho_normal,
                  hard_rejection_weight, irls_weight, rho_eval, rho_prime,
                  skipped_huber, tune_for_bdp, tune_for_efficiency)
from .shooting import (ShootingConfig, ShootingFit, clean_column,
                       default_config, flag_outliers, huberize_columns,
                       impute_cells, initial_fit, mad, partial_response,
                       shooting_fit, update_cell_weights)
from .simbench import (ContaminationScheme, ExperimentReport, SimDesign,
                       and_metric, contaminate_cellwise, contaminate_rowwise,
                       contaminate_vertical, gen_clean, n_mse,
                       real_data_contaminate, real_data_resample, run_table)
from .univariate import SimpleSFit, simple_s_fit, weighted_ls_simple

__version__ = "0.1.0"

__all__ = [
    "CalibrationError", "CellshotError", "ContaminationScheme",
    "DegenerateDesignError", "DegenerateResponseError", "EstimationError",
    "ExperimentReport", "IngestionError", "InitializationError", "LinearFit",
    "RegressionData", "RhoSpec", "ScaleSolution", "ShootingConfig",
    "ShootingFit", "SimDesign", "SimpleSFit", "and_metric", "biweight",
    "clean_column", "contaminate_cellwise", "contaminate_rowwise",
    "contaminate_vertical", "default_config", "expected_rho_normal",
    "flag_outliers", "gen_clean", "hard_rejection_weight", "huberize_columns",
    "impute_cells", "initial_fit", "initial_scale", "irls_weight", "load_csv",
    "ls_fit", "mad", "mm_fit", "n_mse", "partial_response",
    "real_data_contaminate", "real_data_resample", "rho_eval", "rho_prime",
    "run_table", "s_fit", "shooting_fit", "simple_s_fit", "skipped_huber",
    "solve_mscale", "tune_for_bdp", "tune_for_efficiency",
    "update_cell_weights", "weighted_ls_simple",
]
