DEFAULT_BETA_GRID = [0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]

# schedules need sigma > 0; a noiseless run gets vanishing thresholds instead
SIGMA_FLOOR = 1e-6

DEFAULT_SNR_SCALE = 7.0
DEFAULT_PEAK = 255.0

CSV_FLOAT_FORMAT = ".10g"
TIMESTAMP_PREFIX = "# generated "

IMAGE_SUFFIX = ".pgm"

# verify suite
VERIFY_TRIALS = 20
VERIFY_PARSEVAL_TOL = 1e-10
VERIFY_PENALTY_PARAMS = [0.1, 0.5, 1.0, 5.0]
VERIFY_ORACLE_PARAMS = [0.0, 0.5, 0.99]
VERIFY_ORACLE_TOL = 1e-6
VERIFY_BOUNDARY_A = 0.25
VERIFY_NONCONVEX_A = 0.3
