"""Magic numbers and default settings shared across acesLab modules."""
from math import log

#Layer and measurement / reset times (in seconds) for the surface code
#syndrome extraction circuits.
SINGLE_QUBIT_LAYER_TIME = 29e-9
TWO_QUBIT_LAYER_TIME = 29e-9
MEAS_RESET_TIME = 660e-9

#Default infidelities for the single-qubit gates, two-qubit gates
#and measurements.
DEFAULT_R1 = 0.00075
DEFAULT_R2 = 0.005
DEFAULT_RM = 0.02

#Total log-variance used by the log-normal noise model.
DEFAULT_SIGMA_TOT_SQ = log(10 / 9)

#Default noise settings used by the pipeline and the command line.
default_noise_params = {"r1":DEFAULT_R1, "r2":DEFAULT_R2, "rm":DEFAULT_RM,
        "sigma_tot_sq":DEFAULT_SIGMA_TOT_SQ}

#Default settings for the design optimizers. l_set is None since it is
#set to 5 times the number of unique layers unless otherwise specified.
default_optimiser_params = {"eta":10**(3/4), "mu":0.99, "eta_r":10**(1/4),
        "n_ex":3, "l_ex":10, "l_set":None, "f_trial":20,
        "max_steps":1000, "trial_max_steps":60, "rel_tol":1e-6,
        "tol_window":10, "revert_window":5, "revert_limit":2,
        "max_repetition":2001, "seed":123}

#The size above which dense calculations for the figure of merit are
#replaced by sparse solves.
MAX_DENSE_MERIT_COLS = 2000
#The number of columns solved against at once on the sparse path.
SPARSE_MERIT_BATCH = 256
#The largest covariance matrix for which we are willing to calculate
#eigenvalues for the NRMSE distribution.
MAX_DISTRIBUTION_COLS = 5000
#The minimum number of Monte Carlo draws for the NRMSE distribution.
MIN_DISTRIBUTION_DRAWS = 100000
DISTRIBUTION_CHUNK = 10000

#The largest connected block of the circuit eigenvalue covariance
#matrix for which we will use a dense Cholesky decomposition during
#generalised least squares.
MAX_GLS_BLOCK_SIZE = 3000
#GLS above this many rows falls back to WLS during fitting.
MAX_FGLS_ROWS = 2000000
FGLS_TOL = 1e-10
FGLS_MAX_ITER = 10

#Number of shots simulated in one block by the frame simulator.
SHOT_BLOCK_SIZE = 2**20

#Default toy model settings.
TOY_TAU = 660 / 29
TOY_LAMBDA_M = 0.96
TOY_MAX_PHI = 1e7

#Version of the JSON documents written by acesLab.
FORMAT_VERSION = 1

#Score returned if the design matrix is rank deficient, used by the
#optimizers so that a rank deficient design is never accepted.
DEFAULT_SCORE_IF_PROBLEM = float("inf")

#Random tuple generation: the number of attempts to draw a tuple that
#never places two multi-qubit layers next to each other, and the depth
#above which an accepted random tuple is reported as unusually deep.
MAX_TUPLE_ATTEMPTS = 1000
SHALLOW_TUPLE_DEPTH = 4
