"""
Configuration file for the Periodic Homogenization Toolkit
"""
from pathlib import Path

# Base paths
BASE_DIR = Path(__file__).parent
CONFIGS_DIR = BASE_DIR / "configs"
OUTPUT_DIR = BASE_DIR / "output"
CSV_OUTPUT_DIR = OUTPUT_DIR / "csv"
EXCEL_OUTPUT_DIR = OUTPUT_DIR / "excel"
REPORTS_OUTPUT_DIR = OUTPUT_DIR / "reports"
FIELDS_OUTPUT_DIR = OUTPUT_DIR / "fields"
LOGS_DIR = BASE_DIR / "logs"

# Ensure directories exist
for directory in [CSV_OUTPUT_DIR, EXCEL_OUTPUT_DIR, REPORTS_OUTPUT_DIR, FIELDS_OUTPUT_DIR, LOGS_DIR]:
    directory.mkdir(parents=True, exist_ok=True)

# Linear algebra and sampling settings
SOLVER_SETTINGS = {
    "cg_tol": 1e-10,  # Relative residual for the cell problem
    "cg_cap_factor": 10,  # Iteration cap = factor * sqrt(total modes)
    "cg_min_iterations": 50,  # Floor for the iteration cap
    "resolvent_tol": 1e-10,  # Relative residual for torus resolvent solves
    "resolvent_min_iterations": 200,
    "gmres_restart": 50,
    "rank_tol": 1e-8,  # sigma_min > rank_tol * sigma_max on the real sphere
    "complex_rank_tol": 1e-5,  # Threshold on the minimized complex sigma ratio
    "complex_rank_trials": 64,
    "sphere_samples": 4096,  # Real unit-sphere samples for d >= 2
    "skew_tol": 1e-10,  # Allowed skew-Hermitian part of g0 (relative)
    "dealias": 1.5,  # Zero-padding factor for dealiased products
    "kernel_tol": 1e-8,  # Kernel eigenvalues < tol * lambda_{q+1}
    "kernel_gap": 10.0,  # Required gap ratio between kernel and first nonzero eigenvalue
    "spectrum_tol": 1e-10,  # Shift-to-eigenvalue distance treated as singular
}

# Defaults for studies (overridable per config)
STUDY_DEFAULTS = {
    "zeta": -1.0,
    "probe_count": 8,  # Random unit-norm right-hand sides for norm probes
    "power_iterations": 20,
    "c_flat_margin": 0.9,
    "noise_floor": 1e-9,  # Values below 10x this are not fitted
    "r2_flag": 0.9,  # Fits below this R^2 are flagged
    "cells_per_period": 16,  # Reference mesh elements per eps-period
    "reference_refinement": 8,  # Reference mesh / study mesh
    "quadrature_panels_per_period": 8,
    "collar": 0.5,  # Extension collar as a fraction of the domain diameter
    "cutoff": 64,  # Cell-problem grid size per dimension
    "resolution": 16,  # Study mesh elements per unit length
    "garding_scan": 25,  # k2 grid points on the Pareto scan
    "threads": 1,
}

# Acceptance thresholds enforced by --check
ACCEPTANCE_THRESHOLDS = {
    "slope_L2": 0.9,
    "slope_Hp": 0.9,
    "r2": 0.95,
    "zeta_exponent_slack": 0.15,
    "sqrt_ratio_variation": 0.6,  # e_Hp_corr / eps^(1/2) growth allowance
    "ratio_variation": 0.5,  # e_L2 / eps growth allowance
    "plain_over_corrected": 0.2,  # e_Hp_corr < 0.2 * e_Hp_plain at the smallest eps
    "smoothing_factor": 2.0,  # K_N vs K0_N errors agree within this factor
    "rho_factor": 3.0,  # measured vs rho_flat-predicted growth
    "bar_slope": 0.45,
    "under_slope": 0.9,
}

# Study statuses
STUDY_STATUS = {
    "PASSED": "PASSED",
    "FLAGGED": "FLAGGED",
    "FAILED": "FAILED",
}

# CLI exit codes
EXIT_CODES = {
    "PASS": 0,
    "THRESHOLD_FAILURE": 1,
    "CONFIG_ERROR": 2,
    "SOLVER_FAILURE": 3,
}

THREADS_ENV_VAR = "HOMOG_THREADS"

# Result tables
CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = [
    "study",
    "problem_id",
    "eps",
    "zeta_re",
    "zeta_im",
    "e_L2",
    "e_Hp",
    "e_Hp_plain",
    "e_Hp_std",
    "e_flux",
    "e_flux_std",
    "e_L2_opnorm",
]
CSV_FLOAT_FORMAT = "%.12e"

# Field dump format
FIELD_DUMP = {
    "format": "periodic-field",
    "version": 1,
}

# Logging configuration
LOG_CONFIG = {
    "processing_log": LOGS_DIR / "processing.log",
    "solver_errors_log": LOGS_DIR / "solver_errors.log",
    "config_errors_log": LOGS_DIR / "config_errors.log",
    "log_level": "INFO",
    "log_format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    "date_format": "%Y-%m-%d %H:%M:%S",
}
