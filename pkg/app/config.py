"""Application configuration and constants."""

TOOL_NAME = "curvflow"
TOOL_VERSION = "0.1.0"

# Environment
THREADS_ENV = "CURVFLOW_THREADS"
LOG_LEVEL_ENV = "CURVFLOW_LOG_LEVEL"
DEFAULT_LOG_LEVEL = "WARNING"

# Exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_MONITOR = 3

# Symmetric functions
EIGEN_TIE_RTOL = 1e-9
SYMMETRY_TOL = 1e-12
SAMPLE_LOG_LOW = 1e-3
SAMPLE_LOG_HIGH = 1e3
HOMOGENEITY_FACTORS = (0.5, 2.0, 10.0)
HOMOGENEITY_RTOL = 1e-12
NORMALIZATION_TOL = 1e-12
CONCAVITY_EIG_TOL = 1e-8
DECAY_TARGET = 1e-3
DECAY_MONOTONE_TOL = 1e-12
EULER_RTOL = 1e-10
RESIDUAL_FLOOR = 1e-10
DEFAULT_CHECK_SAMPLES = 1000
DEFAULT_SEED = 7

# Geometry
LAMBDA_FLOOR = 1e-10
SINGULAR_RCOND = 1e-14

# Flow
DEFAULT_SAFETY = 0.5
BLOWUP_THRESHOLD = 1e12
MIN_SUPPORT_NODES = 16
COLLAPSE_FRACTION = 1e-2
DEFAULT_SNAPSHOT_EVERY = 50
MAX_STEPS = 5_000_000

# Monitors
GRADIENT_MONITOR_RTOL = 1e-2
LAMBDA_MIN_MONITOR_RTOL = 5e-2
SPEED_MONITOR_RTOL = 0.0
COMPARISON_TOL = 1e-10
SPHERE_IDENTITY_TOL = 1e-10
BARRIER_TOP_BAND = 1e-6
DEFAULT_BARRIER_SAMPLES = 10_000

# Export
FLOAT_FORMAT = "%.12g"
TRAJECTORY_COLUMNS = ["t", "dt", "min_w", "max_w", "max_v", "min_lambda_min", "max_F"]
SNAPSHOT_COLUMNS = ["i", "j", "x1", "x2", "w", "v", "lambda_min", "lambda_max", "F"]
SUPPORT_COLUMNS = ["theta", "S", "kappa"]
MANIFEST_NAME = "manifest.json"
