from fractions import Fraction

from .base import env

# Rewriting budgets
NORMALIZE_MAX_STEPS = env.int("SUPBOUND_NORMALIZE_MAX_STEPS", 10_000)
DERIVATION_MAX_STATES = env.int("SUPBOUND_DERIVATION_MAX_STATES", 100_000)

# Sampling plan used to upgrade Unknown verdicts to Fails
SAMPLING_GRID_STEP = Fraction(env.str("SUPBOUND_SAMPLING_GRID_STEP", "1/4"))
SAMPLING_GRID_MAX = env.int("SUPBOUND_SAMPLING_GRID_MAX", 10)
SAMPLING_GRID_CAP = env.int("SUPBOUND_SAMPLING_GRID_CAP", 100_000)
SAMPLING_RANDOM_POINTS = env.int("SUPBOUND_SAMPLING_RANDOM_POINTS", 1_000)
SAMPLING_MAX_NUMERATOR = env.int("SUPBOUND_SAMPLING_MAX_NUMERATOR", 32)
DEFAULT_SEED = env.int("SUPBOUND_SEED", 20240101)

# Strictness margins for polynomial interpretations
PI_EPSILON = Fraction(env.str("SUPBOUND_PI_EPSILON", "1"))
PI_DELTA = Fraction(env.str("SUPBOUND_PI_DELTA", "1"))

# Approximate (non-certifying) real-coefficient mode
APPROX_TOLERANCE = Fraction(env.str("SUPBOUND_APPROX_TOLERANCE", "1/1000000000"))
APPROX_PRECISION = env.int("SUPBOUND_APPROX_PRECISION", 50)

# Runtime complexity measurement
RC_EXHAUSTIVE_MAX_SIZE = env.int("SUPBOUND_RC_EXHAUSTIVE_MAX_SIZE", 12)
RC_SAMPLES_PER_SIZE = env.int("SUPBOUND_RC_SAMPLES_PER_SIZE", 200)

# Synthesis
SYNTH_TIME_BUDGET = env.float("SUPBOUND_SYNTH_TIME_BUDGET", 60.0)
LINEAR_SLOPE_BOUND = env.int("SUPBOUND_LINEAR_SLOPE_BOUND", 2)

# Encoder document limits
ENCODER_MAX_K = env.int("SUPBOUND_ENCODER_MAX_K", 4)
ENCODER_MAX_D = env.int("SUPBOUND_ENCODER_MAX_D", 4)
