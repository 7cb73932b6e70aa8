"""Least squares estimation of the gate log-eigenvalues x from the circuit
log-eigenvalue estimates b = -log(estimates), which satisfy b ~ A x.

OLS and WLS solve the normal equations of the row-scaled system
sqrt(W) A x = sqrt(W) b, with W the inverse of the estimated diagonal of
Omega'. FGLS starts from the WLS estimate and repeatedly rebuilds Omega'
from the current gate eigenvalues, solving the GLS problem with one
Cholesky factorisation per connected block of Omega', until the estimate
stops changing. Negative log-eigenvalues are set to 0, so that every
gate eigenvalue estimate lies in (0, 1]."""
import warnings

import numpy as np
from scipy import sparse
from scipy.linalg import cho_factor, cho_solve, LinAlgError
from scipy.sparse.linalg import factorized

from .eigenvalue_estimation import CircuitEigenvalueEstimates
from ..design_toolkit.covariance_model import CovarianceModel
from ..scoring_toolkit.gate_covariance import BlockCholeskySolver
from ..exceptions import RankDeficiencyError
from ..constants import constants


FIT_METHODS = ("OLS", "WLS", "FGLS")



class GateEigenvalueFit():
    """The result of a least squares fit.

    Attributes:
        method (str): The method requested.
        method_used (str): The method actually used; FGLS falls back to
            WLS on very large designs.
        log_eigenvalues (np.ndarray): x, with negative entries set to 0.
        gate_eigenvalues (np.ndarray): exp(-x), in (0, 1].
        diagnostics (dict): rows_excluded, rows_clipped, negative_zeroed,
            clipped_to_one, iterations and converged.
    """

    def __init__(self, method:str, method_used:str, log_eigenvalues, diagnostics:dict):
        self.method = method
        self.method_used = method_used
        self.log_eigenvalues = np.asarray(log_eigenvalues, dtype=np.float64)
        self.gate_eigenvalues = np.exp(-self.log_eigenvalues)
        self.diagnostics = dict(diagnostics)

    def to_dict(self) -> dict:
        return {"method":self.method, "method_used":self.method_used,
                "log_eigenvalues":self.log_eigenvalues.tolist(),
                "gate_eigenvalues":self.gate_eigenvalues.tolist(),
                "diagnostics":self.diagnostics}


def _solve_normal(amat, rhs, weighted) -> np.ndarray:
    """Solves (A^T W A) x = A^T W b given W A (as weighted) and W b (rhs).

    Raises:
        RankDeficiencyError: If the normal matrix is singular.
    """
    normal_mat = (amat.T @ weighted).tocsc()
    target = amat.T @ rhs
    if normal_mat.shape[0] <= constants.MAX_DENSE_MERIT_COLS:
        normal_mat = normal_mat.toarray()
        try:
            factor = cho_factor(0.5 * (normal_mat + normal_mat.T))
        except LinAlgError as err:
            raise RankDeficiencyError("The design matrix restricted to the "
                    "measured rows does not have full column rank.") from err
        pivots = np.abs(np.diag(factor[0]))
        if pivots.min() < 1e-7 * pivots.max():
            raise RankDeficiencyError("The design matrix restricted to the "
                    "measured rows does not have full column rank.")
        return cho_solve(factor, target)
    try:
        solve = factorized(normal_mat)
    except RuntimeError as err:
        raise RankDeficiencyError("The normal matrix is singular.") from err
    return solve(target)


def _finish(method, method_used, x_hat, diagnostics) -> GateEigenvalueFit:
    negative = x_hat < 0
    diagnostics["negative_zeroed"] = int(negative.sum())
    diagnostics["clipped_to_one"] = int(negative.sum())
    return GateEigenvalueFit(method, method_used, np.where(negative, 0, x_hat),
            diagnostics)


def fit_gate_eigenvalues(design, estimates:CircuitEigenvalueEstimates,
        method:str = "WLS", tuple_shots = None) -> GateEigenvalueFit:
    """Estimates the gate eigenvalues from circuit eigenvalue estimates.

    Args:
        design (ExperimentalDesign): The design.
        estimates (CircuitEigenvalueEstimates): The row estimates.
        method (str): One of "OLS", "WLS", "FGLS".
        tuple_shots: The total shots given to each tuple, used by FGLS to
            scale each block of Omega'. If None, they are summed from the
            row shots of each tuple's experiments.

    Returns:
        fit (GateEigenvalueFit): The estimates and diagnostics.

    Raises:
        ValueError: If the method is not recognized or the estimates do
            not match the design.
        RankDeficiencyError: If the measured rows do not identify every
            gate eigenvalue.
    """
    if method not in FIT_METHODS:
        raise ValueError("method must be one of 'OLS', 'WLS', 'FGLS'.")
    if estimates.num_rows != design.num_rows:
        raise ValueError("There must be one estimate per design matrix row.")

    clipped, was_clipped = estimates.clipped()
    valid = estimates.valid
    amat = sparse.csr_matrix(design.design_matrix, dtype=np.float64)[valid]
    b_vec = -np.log(clipped[valid])
    diagnostics = {"rows_excluded":int((~valid).sum()),
            "rows_clipped":int(was_clipped.sum()), "iterations":0, "converged":True}

    if method == "OLS":
        return _finish(method, "OLS", _solve_normal(amat, b_vec, amat), diagnostics)

    row_shots = estimates.row_shots[valid].astype(np.float64)
    spread = np.maximum(1 - clipped[valid]**2, 1 / row_shots)
    weights = clipped[valid]**2 * row_shots / spread
    x_hat = _solve_normal(amat, weights * b_vec, sparse.diags(weights) @ amat)
    if method == "WLS":
        return _finish(method, "WLS", x_hat, diagnostics)

    if design.num_rows > constants.MAX_FGLS_ROWS:
        warnings.warn("The design is too large for FGLS; using WLS instead.")
        return _finish(method, "WLS", x_hat, diagnostics)
    if tuple_shots is None:
        #Every experiment of a tuple gets the same shots.
        per_experiment = estimates.row_shots / design.row_counts
        tuple_shots = np.array([per_experiment[design.row_offsets[k]:
            design.row_offsets[k+1]].max() * block.num_experiments
            for k, block in enumerate(design.blocks)])
    tuple_shots = np.asarray(tuple_shots, dtype=np.float64)
    if np.any(tuple_shots <= 0):
        warnings.warn("Some tuples have no shots; using WLS instead of FGLS.")
        return _finish(method, "WLS", x_hat, diagnostics)

    valid_rows = np.flatnonzero(valid)
    jitter = np.zeros(design.num_rows)
    jitter[valid] = 1 / row_shots**2
    converged = False
    for iteration in range(constants.FGLS_MAX_ITER):
        cov_model = CovarianceModel(design, np.exp(-np.maximum(x_hat, 0)))
        blocks = []
        for k, block in enumerate(cov_model.omega_prime_blocks(tuple_shots)):
            rows = np.arange(design.row_offsets[k], design.row_offsets[k+1])
            keep = valid[rows]
            block = block + sparse.diags(jitter[rows])
            blocks.append(sparse.csr_matrix(block)[keep][:, keep])
        try:
            solver = BlockCholeskySolver(blocks)
        except LinAlgError:
            warnings.warn("The estimated covariance is not positive definite; "
                    "returning the last FGLS iterate.")
            break
        weighted = solver.weighted_design(amat)
        new_x = _solve_normal(amat, solver.solve(b_vec), weighted)
        diagnostics["iterations"] = iteration + 1
        change = np.abs(new_x - x_hat).max()
        x_hat = new_x
        if change < constants.FGLS_TOL:
            converged = True
            break
    if not converged:
        warnings.warn("FGLS did not converge; returning the last iterate.")
    diagnostics["converged"] = converged
    diagnostics["rows_used"] = int(valid_rows.shape[0])
    return _finish(method, "FGLS", x_hat, diagnostics)
