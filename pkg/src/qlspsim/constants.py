"""Numerical tolerances shared by operations and tests.

Every threshold used to accept or reject a numerical result lives here, so the
checks in the test-suite and the guards inside the library cannot drift apart.
"""

# linalg
HERMITIAN_TOL = 1e-12
NORMALIZE_TOL = 1e-10
SVD_RECON_TOL = 1e-10
ORTHO_TOL = 1e-10
EIG_RESIDUAL_TOL = 1e-10
UNITARY_TOL = 1e-10
CHEBYSHEV_TOL = 1e-12
JACOBI_MAX_SWEEPS = 60

# problem
NORM_A_TOL = 1e-10
KAPPA_TOL = 1e-8
NULL_SINGULAR_TOL = 1e-10
GAP_TOL = 1e-8
SIGMA_MAX_TOL = 1e-8
RANK_TOL = 1e-12
NULL_ANGLE_TOL = 1e-8
INTERLACE_SLACK = 1e-9
DEGENERATE_LAST_TOL = 1e-12
SPECTRUM_PAIRING_TOL = 1e-9

# blockenc
DILATION_NORM_TOL = 1e-12
ENCODING_TOL = 1e-10

# qsp
FILTER_MAX_HALF_DEGREE = 10_000
FILTER_GRID_PER_DEGREE = 10
PHASE_RESIDUAL_TOL = 1e-10
PHASE_NEWTON_TOL = 1e-13
PHASE_MAX_ITER = 120
QSP_ORACLE_TOL = 1e-8

# driver
RESIDUAL_FACTOR = 5.0
POSTSELECT_MIN_RATE = 0.01
D_COMPONENT_WINDOW = (0.4, 0.8)
EXACT_MODE = "exact"
SAMPLED_MODE = "sampled"
