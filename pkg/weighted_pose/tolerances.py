"""
Numeric thresholds and constants.
Tune here; every module reads its tolerances from this file.
"""

# RigidTransform construction: accept as-is up to ORTHO_TOL, re-orthonormalize
# (polar decomposition) up to ORTHO_REPAIR_TOL, reject beyond.
ORTHO_TOL = 1e-9
ORTHO_REPAIR_TOL = 1e-6
DET_TOL = 1e-9

# alpha sums within this of 1.0 are left untouched (keeps normalization idempotent)
ALPHA_SUM_TOL = 1e-12

# sigma_2 / sigma_1 below this means rank < 2
DEGENERACY_RATIO = 1e-9

# Oracle descent
ORACLE_STEP_TOL = 1e-10
ORACLE_MAX_ITERS = 500
ORACLE_RESTARTS = 8
# absolute, in the 2-norm over all six components
ORACLE_GRADIENT_CHECK_TOL = 1e-5
ORACLE_GRADIENT_CHECK_STEP = 1e-6
ARMIJO_C = 1e-4
LINE_SEARCH_HALVINGS = 60
# predicted decrease below STALL_DECREASE * J is lost to rounding
STALL_DECREASE = 1e-12

FD_STEP = 1e-6

# Synthetic scenarios
TRANSLATION_RANGE = 1.0  # translations uniform in [-1, 1]^3
CLOUD_HALF_EXTENT = 0.5  # clouds live in the unit box centred at the origin
OUTLIER_HALF_WIDTH = 2.0
# per-point noise multipliers are log-uniform in this range (geometric mean 1)
NOISE_SCALE_RANGE = (0.3, 3.0)
MIN_POINTS = 3

# Scenario files
SCENARIO_VERSION = 1
