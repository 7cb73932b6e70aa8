"""Closed-form figure of merit for the toy design: a single layer of
single-qubit Pauli gates on n qubits, all with gate eigenvalue lambda and
measurement eigenvalue lambda_m, characterised with two tuples repeating
the layer phi1 and phi2 = phi1 + phi times. The phi2 tuple receives shot
weight gamma. Measurement and reset take time tau relative to the layer.

The closed forms take the large-n limit and a trace over the gate block
of Sigma only. The matrix calculation for the same design, restricted to
the gate eigenvalue columns, gives sqrt(3) / lambda_m times these values
up to a finite-n correction; toy_pipeline_merit applies that conversion."""
import numpy as np
from scipy.optimize import minimize_scalar

from ..constants import constants


def _check_toy_params(lam:float, lam_m:float, tau:float):
    if not 0 < lam <= 1 or not 0 < lam_m < 1:
        raise ValueError("lambda must lie in (0, 1] and lambda_m in (0, 1).")
    if tau <= 0:
        raise ValueError("tau must be positive.")


def toy_basic_time_factor(tau:float) -> float:
    """The time factor of the basic tuple set {(), (1)}."""
    return 2 * tau * (tau + 1) / (2 * tau + 1)


def toy_time_factor(tau:float, phi1:float, phi:float, gamma:float) -> float:
    """The time factor tau + phi1 + gamma phi of the toy design."""
    return tau + phi1 + gamma * phi


def toy_sample_ratio(tau:float, phi1:float, phi:float, gamma:float) -> float:
    """The ratio S' / S of measurement shots to measurement budget."""
    return toy_time_factor(tau, phi1, phi, gamma) / toy_basic_time_factor(tau)


def toy_f_terms(lam:float, lam_m:float, phi1:float, phi:float) -> tuple:
    """The terms f1 and f2 of the toy figure of merit."""
    if phi <= 0 or phi1 < 0:
        raise ValueError("phi must be positive and phi1 non-negative.")
    f_1 = lam**2 * (lam**(-2 * phi1) - lam_m**2) / phi**2
    f_2 = lam**2 * (lam**(-2 * (phi1 + phi)) - lam_m**2) / phi**2
    return f_1, f_2


def toy_merit(lam:float, lam_m:float, tau:float, phi1:float, phi:float,
        gamma:float, time_accounting:bool = True) -> float:
    """The toy figure of merit F, or F' if time_accounting is False.

    Raises:
        ValueError: If a parameter is outside its domain.
    """
    _check_toy_params(lam, lam_m, tau)
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1).")
    f_1, f_2 = toy_f_terms(lam, lam_m, phi1, phi)
    weighted = f_1 / (1 - gamma) + f_2 / gamma
    if time_accounting:
        return float(np.sqrt(0.5 * toy_sample_ratio(tau, phi1, phi, gamma) * weighted))
    return float(np.sqrt(0.5 * weighted))


def toy_optimal_weight(lam:float, lam_m:float, tau:float, phi1:float,
        phi:float, time_accounting:bool = True) -> float:
    """The shot weight gamma minimising the toy figure of merit."""
    _check_toy_params(lam, lam_m, tau)
    f_1, f_2 = toy_f_terms(lam, lam_m, phi1, phi)
    if time_accounting:
        first, second = np.sqrt((tau + phi1) * f_2), np.sqrt((tau + phi1 + phi) * f_1)
    else:
        first, second = np.sqrt(f_2), np.sqrt(f_1)
    return float(first / (first + second))


def toy_optimised_merit(lam:float, lam_m:float, tau:float, phi:float,
        time_accounting:bool = True) -> float:
    """The toy figure of merit with phi1 = 0 and the optimal shot weight."""
    gamma = toy_optimal_weight(lam, lam_m, tau, 0, phi, time_accounting)
    return toy_merit(lam, lam_m, tau, 0, phi, gamma, time_accounting)


def toy_optimal(lam:float, lam_m:float, tau:float = constants.TOY_TAU,
        time_accounting:bool = True) -> tuple:
    """Optimises the repetition number of the toy design. phi1 is fixed at
    0, since the figure of merit increases with phi1. phi is optimised as
    a continuous variable, and the better of its floor and ceiling is
    returned.

    Returns:
        phi_opt (int): The optimal repetition number.
        gamma_opt (float): The optimal shot weight for phi_opt.
        merit_opt (float): The figure of merit at the optimum.
    """
    _check_toy_params(lam, lam_m, tau)
    def log_objective(log_phi):
        return toy_optimised_merit(lam, lam_m, tau, np.exp(log_phi), time_accounting)

    result = minimize_scalar(log_objective, bounds=(0, np.log(constants.TOY_MAX_PHI)),
            method="bounded", options={"xatol":1e-10})
    phi_cont = float(np.exp(result.x))
    candidates = {max(int(np.floor(phi_cont)), 1), max(int(np.ceil(phi_cont)), 1)}
    phi_opt = min(sorted(candidates), key=lambda p: toy_optimised_merit(lam, lam_m,
        tau, p, time_accounting))
    gamma_opt = toy_optimal_weight(lam, lam_m, tau, 0, phi_opt, time_accounting)
    return phi_opt, gamma_opt, toy_optimised_merit(lam, lam_m, tau, phi_opt,
            time_accounting)


def toy_pipeline_merit(lam:float, lam_m:float, tau:float, phi1:float, phi:float,
        gamma:float, nqubits:int, time_accounting:bool = True) -> float:
    """The figure of merit the matrix calculation gives for the toy design
    on nqubits qubits, with the traces restricted to the gate eigenvalue
    columns. Each circuit eigenvalue is one of three experiments' worth of
    shots, and the Taylor correction of F is 1 - 1/(12 n) since the gate
    block of Sigma is a multiple of the identity."""
    if nqubits < 1:
        raise ValueError("nqubits must be positive.")
    return toy_merit(lam, lam_m, tau, phi1, phi, gamma, time_accounting) * \
            np.sqrt(3) / lam_m * (1 - 1 / (12 * nqubits))
