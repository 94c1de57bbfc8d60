"""
Constant variables for hamred package
"""

_LOGGER = None

# Structural tolerance for hermiticity and orthonormality checks
HERMITIAN_TOL = 1e-10
# Spectral tolerance, scaled by operator size where noted
SPECTRAL_TOL = 1e-8
# Slack used for every threshold comparison (alpha, beta, gamma, delta, 2/3, 1/3)
DEFAULT_SLACK = 1e-9
NULL_TOL = 1e-9
NORM_TOL = 1e-9

DEFAULT_DIM_CAP = 8192
DIM_CAP_ENV = "HAMRED_DIM_CAP"

# Brute-force limits
ENUMERATION_CAP = 10**7
MONOTONE_INPUT_CAP = 16
# Widest circuit the sparse simulator can index with int64 basis states
QUBIT_BUDGET = 62
DEFAULT_SEARCH_BUDGET = 2000

# Amplitudes below this are dropped by the sparse basis simulator
SPARSE_AMPLITUDE_TOL = 1e-14

# cQMA acceptance thresholds
ACCEPT_THRESHOLD = 2.0 / 3.0
REJECT_THRESHOLD = 1.0 / 3.0

# QIRR numeric witness search
T_GRID_POINTS = 64
T_GRID_MAX = 4.0
T_GRID_VECTORS = 8

# Auto-Delta search
DELTA_MAX_EXPONENT = 40

# Sanity floor constant for the rejection energy b
HISTORY_FLOOR_CONSTANT = 1e-3

CLOCK_LEGAL = "legal"
CLOCK_UNARY = "unary"
CLOCK_MODES = [CLOCK_LEGAL, CLOCK_UNARY]

MODE_BASIC = "basic"
MODE_IMPROVED = "improved"
QIRR_MODES = [MODE_BASIC, MODE_IMPROVED]

# Instance verdicts
YES = "yes"
NO = "no"

ACCEPTS = "accepts"
REJECTS = "rejects"
UNDETERMINED = "undetermined"

# Verdict states in reports
HOLDS = "holds"
FAILS = "fails"

FORMAT_VERSION = "hamred/1"
REDUCTION_KINDS = ["qmw", "qssc", "qirr", "lh", "lh-hw", "qmsa"]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_UNDETERMINED = 2
EXIT_USAGE = 3
