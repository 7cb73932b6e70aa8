"""Analytic gradients of the figure of merit with respect to the shot
weights Gamma and the shot log-weights gamma, with Gamma = softmax(gamma).

Writing F = sqrt(rho/N) g(t1, t2) with rho = S'/S and t1, t2 the traces of
Sigma and Sigma^2 at S = 1, every derivative of g reduces to tr(K dSigma')
for the symmetric matrix

    K = g_1 diag(lambda)^2 + 2 g_2 diag(lambda) Sigma diag(lambda),

with g_1, g_2 the partial derivatives of g. Since Omega' restricted to
tuple T scales as 1 / Gamma_T, and so do the WLS and GLS weights,

    Gamma_T dg/dGamma_T = 2 tr(K A+_T R_T) - tr(A+_T^T K A+_T Omega'_T),

where A+_T holds the columns of A+ for the rows of tuple T and
R = (I - A A+) Omega' A+^T. The first term appears only for WLS: OLS
weights do not depend on Gamma, and R vanishes for GLS, as it does for
WLS whenever A is square and invertible."""
import numpy as np

from ..scoring_toolkit.gate_covariance import GateCovariance


def softmax(log_weights) -> np.ndarray:
    """Shot weights from shot log-weights."""
    log_weights = np.asarray(log_weights, dtype=np.float64)
    shifted = np.exp(log_weights - log_weights.max())
    return shifted / shifted.sum()


def merit_gradient_weights(design, noise, estimator_kind:str = "WLS",
        shot_weights = None, cov_model = None, time_accounting:bool = True,
        column_subset = None) -> tuple:
    """The figure of merit and its gradient with respect to the shot
    weights, treated as independent variables.

    Args:
        design (ExperimentalDesign): The design.
        noise: A NoiseModel or gate eigenvalue vector.
        estimator_kind (str): One of "OLS", "WLS", "GLS".
        shot_weights: If supplied, used instead of the design's weights.
        cov_model (CovarianceModel): An optional prebuilt covariance model.
        time_accounting (bool): If False, S' = S.
        column_subset: If supplied, the traces are taken only over these
            gate eigenvalues.

    Returns:
        merit (float): The figure of merit F.
        gradient (np.ndarray): dF / dGamma_T for each tuple.

    Raises:
        RankDeficiencyError: If the normal matrix is singular.
        SizeGuardError: If the design is too large for the dense path.
    """
    gate_cov = GateCovariance(design, noise, estimator_kind, shot_weights, cov_model)
    weights = gate_cov.shot_weights
    lam = gate_cov.gate_eigenvalues
    num_eigs = design.num_cols
    mask = np.zeros(num_eigs)
    if column_subset is None:
        mask[:] = 1
    else:
        mask[np.asarray(column_subset, dtype=np.int64)] = 1

    pinv = gate_cov.pseudoinverse()
    sigma_p = gate_cov.sigma_prime()
    masked_lam = lam * mask
    sigma = masked_lam[:,None] * sigma_p * masked_lam[None,:]
    trace_1, trace_2 = float(np.trace(sigma)), float((sigma**2).sum())

    if time_accounting:
        rho = design.shots_ratio(weights)
    else:
        rho = 1.0
    g_val = np.sqrt(trace_1) - trace_2 / (4 * trace_1**1.5)
    merit = np.sqrt(rho / num_eigs) * g_val
    g_1 = 0.5 / np.sqrt(trace_1) + 3 * trace_2 / (8 * trace_1**2.5)
    g_2 = -0.25 / trace_1**1.5

    kmat = 2 * g_2 * masked_lam[:,None] * sigma * masked_lam[None,:]
    kmat[np.diag_indices(num_eigs)] += g_1 * masked_lam**2
    k_pinv = kmat @ pinv

    omega_blocks = gate_cov.cov_model.omega_prime_blocks(weights)
    if estimator_kind == "WLS":
        rmat = gate_cov.omega_prime @ pinv.T - gate_cov.amat @ sigma_p

    dg_dweights = np.zeros(weights.shape[0])
    for k, omega_t in enumerate(omega_blocks):
        rows = slice(design.row_offsets[k], design.row_offsets[k+1])
        pinv_t, k_pinv_t = pinv[:, rows], k_pinv[:, rows]
        value = -np.sum((omega_t @ pinv_t.T) * k_pinv_t.T)
        if estimator_kind == "WLS":
            value += 2 * np.sum(k_pinv_t * rmat[rows].T)
        dg_dweights[k] = value / weights[k]

    gradient = np.sqrt(rho / num_eigs) * dg_dweights
    if time_accounting:
        gradient += merit / (2 * rho) * design.durations / design.basic_time_factor
    return float(merit), gradient


def merit_gradient_log_weights(design, noise, estimator_kind:str = "WLS",
        shot_weights = None, cov_model = None, time_accounting:bool = True,
        column_subset = None) -> tuple:
    """The figure of merit and its gradient with respect to the shot
    log-weights gamma, through dGamma_U/dgamma_T = Gamma_U (delta_UT - Gamma_T).
    The gradient components sum to zero.

    Returns:
        merit (float): The figure of merit F.
        gradient (np.ndarray): dF / dgamma_T for each tuple.
    """
    merit, grad_weights = merit_gradient_weights(design, noise, estimator_kind,
            shot_weights, cov_model, time_accounting, column_subset)
    if shot_weights is None:
        shot_weights = design.shot_weights
    weights = np.asarray(shot_weights, dtype=np.float64)
    weights = weights / weights.sum()
    return merit, weights * (grad_weights - np.dot(weights, grad_weights))
