import logging
import math
import os

from enum import Enum, IntEnum

PROJECT_ROOT = os.environ.get("CHIRAL_PROJECT_ROOT", os.getcwd())

# Log
LOG_PATH = os.path.join(PROJECT_ROOT, "logs/chiral-scattering.log")
LOG_FILE_SIZE = 1024 * 1024 * 10
DEFAULT_LOG_LEVEL = getattr(logging, os.environ.get("CHIRAL_LOG_LEVEL", "INFO").upper(), logging.INFO)
LOG_BACKUP_COUNT = 5
# stderr only shows problems unless asked otherwise
CONSOLE_LOG_LEVEL = getattr(logging, os.environ.get("CHIRAL_CONSOLE_LOG_LEVEL", "WARNING").upper(), logging.WARNING)

# Database
DB_HISTORY_PATH = os.path.join(PROJECT_ROOT, "chiral-history.db")
DB_HISTORY_URL = f"sqlite:///{DB_HISTORY_PATH}"
RUNS_TABLE_NAME = "runs"
CRITERIA_TABLE_NAME = "criteria"
HISTORY_LIST_LIMIT = 20

# Environment variables that override CLI options: CHIRAL_SEED, CHIRAL_M, ...
ENV_PREFIX = "CHIRAL_"

INFINITE = math.inf


class Command(Enum):
    SINGLE = "single"
    TWO = "two"
    DISORDER = "disorder"
    SWEEP = "sweep"
    VALIDATE = "validate"
    SPECTRUM = "spectrum"

    def __str__(self):
        return self.value


class OutputFormat(Enum):
    CSV = "csv"
    JSON = "json"
    XLSX = "xlsx"

    def __str__(self):
        return self.value


class ExitCode(IntEnum):
    OK = 0
    VALIDATION_FAILED = 1
    CONFIG = 2
    NUMERICAL = 3
    FINITE_MU = 4
    RESAMPLE = 5


class TMFTVariant(Enum):
    # Δ_a in all four momentum factors
    AS_PRINTED = "as_printed"
    # Δ_a paired with photon 1 and Δ_b with photon 2, as in the coordinate form
    PAIRED = "paired"

    def __str__(self):
        return self.value


class SweepParameter(Enum):
    DELTA = "delta"
    M = "m"
    SIGMA = "sigma"

    def __str__(self):
        return self.value


# ====================
# Numerical tolerances
# ====================

# Dimensionless gap below which two detunings are treated as equal (units of κ)
DEFAULT_DEGENERACY_TOL = 1e-6
# |c_0| below EPS * max|c_k| makes a truncated series non-invertible
SERIES_SINGULAR_EPS = 64 * 2.220446049250313e-16
# Inside this radius around δ=0 the (s-δ) division uses the backward recurrence
REMOVABLE_POLE_RADIUS = 0.25
# Extra series order carried by the backward recurrence
REMOVABLE_POLE_EXTRA_ORDER = 160
# Gaussian spectra are cut where they fall below this fraction of the peak
GAUSSIAN_TAIL_CUTOFF = 1e-16
# Exponentially decaying kernels and T-matrices are integrated up to this length (units of 1/κ)
T_MATRIX_X_MAX = 80.0
# Scattered single-photon tails are carried for TAIL_BASE + TAIL_PER_EMITTER * M
SCATTERED_TAIL_BASE = 80.0
SCATTERED_TAIL_PER_EMITTER = 10.0
# Grid spacing limits: sigma / GRID_SIGMA_RESOLUTION and GRID_MAX_SPACING / κ
GRID_SIGMA_RESOLUTION = 16
GRID_MAX_SPACING = 0.05
# Rows of the spectral matrix evaluated at once
SPECTRAL_CHUNK_ROWS = 512

# Adaptive Gauss-Kronrod (QUADPACK) settings
QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 200

# Composite Gauss-Legendre settings
GAUSS_LEGENDRE_ORDER = 16
GAUSS_LEGENDRE_PANEL_WIDTH = 0.25

# erfc is combined with exp(x^2) directly below this argument, erfcx is used above
ERFC_SCALED_SWITCH = 25.0

# ================
# Disorder sampling
# ================

RESAMPLE_LIMIT = 100
DEFAULT_DISORDER_SAMPLES = 1000
DEFAULT_SEED = 20140623
DEFAULT_WORKERS = 1

# =======
# Oracles
# =======

# Imaginary offsets of the contours γ_1, γ_2 (units of κ)
DEFAULT_CONTOUR_OFFSETS = (0.0, 1.5)
# Half-width of the horizontal part beyond the outermost detuning (units of κ)
CONTOUR_MARGIN = 2.0
# Slope of the tails bent away from the real axis
CONTOUR_TAIL_SLOPE = 1.0
# Tails are extended until the exponential envelope drops below exp(-CONTOUR_DECAY_EXPONENT)
CONTOUR_DECAY_EXPONENT = 36.0
CONTOUR_PANEL_WIDTH = 0.5
CONTOUR_TRUNCATION_TOL = 1e-9
CONTOUR_CHUNK_ROWS = 256

# ======
# Output
# ======

OUTPUT_SIGNIFICANT_DIGITS = 17
NUMBER_FORMAT = f"%.{OUTPUT_SIGNIFICANT_DIGITS}g"
UNITS_NOTE = (
    "All frequencies are in units of kappa and all lengths in units of 1/kappa: "
    "delta_phys = kappa * delta, sigma_phys = sigma / kappa"
)
XLSX_DATA_SHEET_TITLE = "Data"
XLSX_PARAMETERS_SHEET_TITLE = "Parameters"
XLSX_COLUMN_WIDTH = 24

# =============
# Default grids
# =============

DEFAULT_SINGLE_GRID = (-60.0, 20.0, 1601)
DEFAULT_TWO_GRID = (-20.0, 20.0, 801)
DEFAULT_SPECTRUM_GRID = (-10.0, 10.0, 2001)
