import os

# Backend
SDP_SOLVER = os.getenv('ISSCERT_SDP_SOLVER', 'CLARABEL')
FALLBACK_SOLVER = os.getenv('ISSCERT_FALLBACK_SOLVER', 'SCS')

# Acceptance tolerances for SDP solutions
EQ_TOL = float(os.getenv('ISSCERT_EQ_TOL', 1e-6))
PSD_TOL = float(os.getenv('ISSCERT_PSD_TOL', 1e-7))

# Log-det linearization
MAXDET_TOL = 1e-4
MAXDET_MAX_ITERS = 30
MAXDET_MIN_EIG = 1e-9

# SOS certificates
SOS_RESIDUAL_TOL = 1e-6
SOS_PSD_TOL = 1e-7
COEFF_CHOP = 1e-10
COMPILE_ZERO_TOL = 1e-9

# Strict inequalities realized as closed ones
MU = 1e-3
STRICT_MARGIN = 1e-4
P_MARGIN = 1e-6
PD_RU_MIN_EPS = 1e-6
ALPHA_FIT_MIN = 1e-6
GRAM_TRACE_WEIGHT = 1e-6

# Consistency sets
MEMBERSHIP_TOL = 1e-6
EXACT_MEMBERSHIP_SLACK = 1e-9
RANK_TOL = 1e-8
SQRT_EIG_FLOOR = 1e-12

# Simulation
INTEGRATION_STEP = float(os.getenv('ISSCERT_INTEGRATION_STEP', 1e-3))
DIVERGENCE_GUARD = 1e6
KNOT_SPACING = 0.1
HORIZON = 1.0

# Sampling checks
SAMPLE_RADIUS_X = 3.0
SAMPLE_RADIUS_EXO = 1.0
SAMPLE_POINTS = 1000
DISSIPATION_TOL = 1e-6
# finite-difference gap allowed per unit integration step, relative to max |V-dot|
ENERGY_TOL = 10.0
PD_RU_SHELLS = (0.1, 1.0, 10.0)
