from __future__ import annotations

from pathlib import Path

APP_NAME = "FieldDrift"
PROG_NAME = "drift_app"

DEFAULT_WORKERS = 1
MAX_WORKERS = 64
MAX_INPUT_FILE_BYTES = 2 * 1024 * 1024 * 1024  # 2 GiB
PARSE_CHUNK_LINES = 50_000
MAX_REPORTED_PARSE_ERRORS = 50

# Analysis windows reported when --periods is omitted.
DEFAULT_PERIODS: tuple[tuple[int, int], ...] = (
    (1991, 2000),
    (2001, 2010),
    (2011, 2019),
    (1991, 2019),
)

SIGNIFICANT_DIGITS = 12
KEYWORDS_PER_ARTICLE_DECIMALS = 2

JACOBI_TOLERANCE = 1e-12
JACOBI_MAX_SWEEPS = 100
EIGENVALUE_CLAMP = 1e-10

SCATTER_MEASURES = (
    "clark",
    "czekanowski",
    "jensen_shannon",
    "lorentzian",
    "prob_symmetric_chi2",
)

ROOT_DIR = Path(__file__).resolve().parent.parent
LOG_ROOT = ROOT_DIR / "logs"
DEFAULT_OUT_DIR = Path("drift_out")
