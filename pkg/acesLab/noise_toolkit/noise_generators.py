"""Generators for the two noise models used to evaluate and optimise
designs: depolarising noise with fixed gate and measurement infidelities,
and log-normal Pauli noise, where each non-identity Pauli error
probability and each measurement error probability is independently
log-normally distributed.

For log-normal noise, the parameters of each b-qubit gate are chosen so
that the sum of its b' = 4^b - 1 error probabilities, approximated as
log-normal with matched moments, has the target mean infidelity and
underlying log-variance sigma_tot_sq."""
import numpy as np

from .noise_model import GateChannel, NoiseModel
from ..pauli_toolkit.clifford_gates import SPAM_BASES
from ..constants import constants


def _check_rates(r1:float, r2:float, rm:float):
    for name, value in (("r1", r1), ("r2", r2), ("rm", rm)):
        if not 0 <= value < 1:
            raise ValueError(f"The infidelity {name} must lie in [0, 1).")


def depolarising_model(circuit, r1:float = constants.DEFAULT_R1,
        r2:float = constants.DEFAULT_R2, rm:float = constants.DEFAULT_RM) -> NoiseModel:
    """Builds depolarising noise: each b-qubit gate has its non-identity
    error probabilities equal to r_b / (4^b - 1), and each measurement
    has error probability rm.

    Args:
        circuit (Circuit): The circuit.
        r1 (float): The single-qubit gate infidelity (padding identities
            included).
        r2 (float): The two-qubit gate infidelity.
        rm (float): The measurement infidelity.

    Returns:
        noise_model (NoiseModel): The depolarising noise model.

    Raises:
        ValueError: If a rate is outside [0, 1).
    """
    _check_rates(r1, r2, rm)
    channels = {}
    for uid, layer in enumerate(circuit.unique_layers):
        for j, gate in enumerate(layer.gates):
            rate = r1 if gate.arity == 1 else r2
            probs = np.full(4**gate.arity, rate / (4**gate.arity - 1))
            probs[0] = 1 - rate
            channels[(uid, j)] = GateChannel((uid, j), gate.kind, probs)
    for qubit in range(circuit.n):
        for basis in SPAM_BASES:
            gate_id = ("meas", qubit, basis)
            channels[gate_id] = GateChannel(gate_id, "Meas", [1 - rm, rm])
    return NoiseModel(circuit, channels, "depolarising",
            {"r1":r1, "r2":r2, "rm":rm})


#Stream labels separating gate and measurement channel keys.
GATE_STREAM = 0
MEAS_STREAM = 1


def channel_rng(seed:int, stream:int, first:int, second:int):
    """The Philox generator for one noise channel."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(
        [int(seed), int(stream), int(first), int(second)])))


def lognormal_params(mean_infidelity:float, num_errors:int,
        sigma_tot_sq:float) -> tuple:
    """The parameters of the normal variable underlying each of
    num_errors log-normal error probabilities whose sum should have
    mean mean_infidelity and log-variance sigma_tot_sq.

    Returns:
        mu_z (float): The mean of the underlying normal variable.
        sigma_z_sq (float): Its variance.
    """
    sigma_z_sq = np.log(1 + num_errors * (np.exp(sigma_tot_sq) - 1))
    mu_z = np.log(mean_infidelity / num_errors) - sigma_z_sq / 2
    return float(mu_z), float(sigma_z_sq)


def lognormal_model(circuit, r1:float = constants.DEFAULT_R1,
        r2:float = constants.DEFAULT_R2, rm:float = constants.DEFAULT_RM,
        sigma_tot_sq:float = constants.DEFAULT_SIGMA_TOT_SQ,
        seed:int = 0) -> NoiseModel:
    """Samples a log-normal Pauli noise model. Each channel draws from its
    own counter-based generator, keyed by the seed and by the channel's
    layer and first qubit (or measured qubit and basis), so a channel's
    probabilities do not change when other gates are added or reordered.

    Args:
        circuit (Circuit): The circuit.
        r1, r2, rm (float): The target mean infidelities.
        sigma_tot_sq (float): The log-variance of each gate's total
            infidelity.
        seed (int): The random seed.

    Returns:
        noise_model (NoiseModel): The sampled noise model.

    Raises:
        ValueError: If a parameter is invalid, or a sampled channel has
            total error probability of 1 or more.
    """
    _check_rates(r1, r2, rm)
    if min(r1, r2, rm) <= 0:
        raise ValueError("Log-normal noise requires positive infidelities.")
    if sigma_tot_sq <= 0:
        raise ValueError("sigma_tot_sq must be positive.")
    gate_params = {1:lognormal_params(r1, 3, sigma_tot_sq),
            2:lognormal_params(r2, 15, sigma_tot_sq)}
    meas_mu, meas_sigma_sq = lognormal_params(rm, 1, sigma_tot_sq)

    channels = {}
    for uid, layer in enumerate(circuit.unique_layers):
        for j, gate in enumerate(layer.gates):
            mu_z, sigma_z_sq = gate_params[gate.arity]
            rng = channel_rng(seed, GATE_STREAM, uid, gate.qubits[0])
            errors = np.exp(mu_z + np.sqrt(sigma_z_sq) *
                    rng.standard_normal(4**gate.arity - 1))
            if errors.sum() >= 1:
                raise ValueError("A sampled gate infidelity exceeds 1; the "
                        "requested rates are too large.")
            channels[(uid, j)] = GateChannel((uid, j), gate.kind,
                    np.concatenate([[1 - errors.sum()], errors]))
    for qubit in range(circuit.n):
        for basis_number, basis in enumerate(SPAM_BASES):
            rng = channel_rng(seed, MEAS_STREAM, qubit, basis_number)
            p_m = float(np.exp(meas_mu + np.sqrt(meas_sigma_sq) * rng.standard_normal()))
            if p_m >= 1:
                raise ValueError("A sampled measurement error probability exceeds 1.")
            gate_id = ("meas", qubit, basis)
            channels[gate_id] = GateChannel(gate_id, "Meas", [1 - p_m, p_m])
    return NoiseModel(circuit, channels, "lognormal",
            {"r1":r1, "r2":r2, "rm":rm, "sigma_tot_sq":sigma_tot_sq}, seed)


def build_noise_model(circuit, kind:str, noise_params:dict = None,
        seed:int = 0) -> NoiseModel:
    """Builds a noise model by name, with parameters falling back to
    constants.default_noise_params.

    Raises:
        ValueError: If the kind or a parameter is not recognized.
    """
    params = constants.default_noise_params.copy()
    if noise_params is not None:
        for key in noise_params:
            if key not in params:
                raise ValueError(f"Unrecognized noise parameter {key}.")
        params.update(noise_params)
    if kind == "depolarising":
        return depolarising_model(circuit, params["r1"], params["r2"], params["rm"])
    if kind == "lognormal":
        return lognormal_model(circuit, params["r1"], params["r2"], params["rm"],
                params["sigma_tot_sq"], seed)
    raise ValueError("Noise kind must be one of 'depolarising', 'lognormal'.")
