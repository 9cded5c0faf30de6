"""
Runtime defaults for the delay-margin toolkit.
Values come from the environment (optionally a .env file); every one of them
can be overridden from the command line.
"""

import os
from dotenv import load_dotenv

# Load environment variables if .env file exists
try:
    load_dotenv()
except Exception as e:
    print(f"Warning: Could not load .env file: {e}")


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        return float(raw)
    except ValueError:
        print(f"Warning: ignoring non-numeric {name}={raw!r}")
        return default


def _env_int(name: str, default: int) -> int:
    return int(_env_float(name, default))


# Rekasius parameter grid (seconds)
T_MIN = _env_float('DELAY_MARGIN_T_MIN', -1000.0)
T_MAX = _env_float('DELAY_MARGIN_T_MAX', 1000.0)
T_STEP = _env_float('DELAY_MARGIN_T_STEP', 0.001)

# Delay ladder depth per crossing
K_MAX = _env_int('DELAY_MARGIN_K_MAX', 10)

WORKERS = max(1, _env_int('DELAY_MARGIN_WORKERS', 1))

# Number of companion matrices handed to one batched eigensolve
BATCH_SIZE = max(1, _env_int('DELAY_MARGIN_BATCH_SIZE', 20000))

# Dense Kronecker companion is refused above this many bytes
MEMORY_CAP_BYTES = _env_float('DELAY_MARGIN_MEMORY_CAP_BYTES', 2e9)

LOG_LEVEL = os.getenv('DELAY_MARGIN_LOG_LEVEL', 'INFO').upper()

# Simulations needing more fixed steps than this are refused
SIM_MAX_STEPS = max(1, _env_int('DELAY_MARGIN_SIM_MAX_STEPS', 5_000_000))

# Numerical thresholds
STABILITY_TOL = 1e-9          # delay-free spectrum must satisfy Re < -STABILITY_TOL
ZERO_ROOT_REL_TOL = 1e-10     # |det(A0+A1)| < tol * ||A0+A1||^n counts as singular
EPS_IMAG_REL = 1e-6           # eps_imag = EPS_IMAG_REL * (1 + ||A0|| + ||A1||)
TOUCH_TOL_REL = 1e-8          # near-axis dip counts as a tangential touch when |Re s| <= tol * |s|
REFINE_TOL_REL = 1e-9         # refine_tol = REFINE_TOL_REL * (t_max - t_min)
COND_LIMIT = 1e12             # companion matrices above this condition number are skipped
WIDEN_FACTOR = 10.0           # t_max >= WIDEN_FACTOR * max(||A0+A1||, 1/||A0-A1||)
UNIT_CIRCLE_TOL = 1e-6        # generalized eigenvalue accepted when ||z| - 1| <= tol

# Simulation verdict thresholds on the envelope ratio
DECAY_RATIO = 0.5
GROWTH_RATIO = 2.0
DIVERGENCE_FACTOR = 1e12
