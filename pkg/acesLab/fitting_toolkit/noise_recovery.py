"""Recovery of Pauli error probabilities from estimated gate eigenvalues,
and the EstimationReport comparing estimates with a known noise model.

Each gate's eigenvalues, with the identity eigenvalue set to 1, are
mapped to probabilities by the inverse Walsh-Hadamard transform and then
projected onto the probability simplex."""
import csv
import json
import os

import numpy as np

from ..noise_toolkit.noise_model import NoiseModel, GateChannel
from ..noise_toolkit.walsh_hadamard import wht_inverse, project_simplex, tvd
from ..pauli_toolkit.clifford_gates import SPAM_BASES
from ..design_toolkit.covariance_model import circuit_eigenvalues
from ..constants import constants


#Report groups for each gate kind. Identity gates appear both in their
#own group and with the other Pauli gates.
GATE_TYPE_GROUPS = {"I":("Pauli", "identity"), "X":("Pauli",), "Y":("Pauli",),
        "Z":("Pauli",), "H":("Hadamard",), "S":("phase",), "CZ":("controlled-Z",),
        "CX":("controlled-X",), "Meas":("measurement",), "Prep":("preparation",)}


def _write_csv(filepath:str, header:list, rows):
    dirname = os.path.dirname(filepath)
    if dirname:
        os.makedirs(dirname, exist_ok=True)
    with open(filepath, "w", newline="", encoding="utf-8") as fhandle:
        writer = csv.writer(fhandle)
        writer.writerow(header)
        writer.writerows(rows)


def recover_probabilities(circuit, gate_eigenvalues) -> dict:
    """Recovers the Pauli error distribution of every gate and measurement.

    Args:
        circuit (Circuit): The circuit.
        gate_eigenvalues: The estimated gate eigenvalue vector, in
            canonical column order.

    Returns:
        distributions (dict): Maps each gate id (uid, j) to its length 4^b
            distribution, and each ("meas", q, basis) to (1 - p_m, p_m).

    Raises:
        ValueError: If the eigenvalue vector has the wrong length.
    """
    gate_eigenvalues = np.asarray(gate_eigenvalues, dtype=np.float64)
    if gate_eigenvalues.shape != (circuit.gate_eigenvalue_count(),):
        raise ValueError("There must be one gate eigenvalue per gate eigenvalue key.")
    distributions = {}
    col = 0
    for uid, layer in enumerate(circuit.unique_layers):
        for j, gate in enumerate(layer.gates):
            size = 4**gate.arity
            eigenvalues = np.concatenate([[1.0], gate_eigenvalues[col:col + size - 1]])
            distributions[(uid, j)] = project_simplex(wht_inverse(eigenvalues))
            col += size - 1
    for qubit in range(circuit.n):
        for basis in SPAM_BASES:
            value = gate_eigenvalues[col]
            distributions[("meas", qubit, basis)] = project_simplex(
                    np.array([(1 + value) / 2, (1 - value) / 2]))
            col += 1
    return distributions


def estimated_noise_model(circuit, gate_eigenvalues) -> NoiseModel:
    """The NoiseModel with the recovered error distributions."""
    channels = {}
    for gate_id, probs in recover_probabilities(circuit, gate_eigenvalues).items():
        if gate_id[0] == "meas":
            kind = "Meas"
        else:
            kind = circuit.unique_layers[gate_id[0]].gates[gate_id[1]].kind
        channels[gate_id] = GateChannel(gate_id, kind, probs, check_input=False)
    return NoiseModel(circuit, channels, generator="estimated")


def _gate_kind(circuit, gate_id) -> str:
    if gate_id[0] == "meas":
        return "Meas"
    return circuit.unique_layers[gate_id[0]].gates[gate_id[1]].kind


def circuit_eigenvalue_residuals(design, estimates, truth) -> list:
    """The residual of every circuit eigenvalue estimate against the
    circuit eigenvalues of the true noise.

    Args:
        design (ExperimentalDesign): The design.
        estimates (CircuitEigenvalueEstimates): The row estimates.
        truth: A NoiseModel or gate eigenvalue vector.

    Returns:
        rows (list): Tuples (row, tuple, pauli, estimate, truth, residual);
            rows without shots have NaN estimates and residuals.
    """
    if isinstance(truth, NoiseModel):
        truth = truth.gate_eigenvalues()
    true_values = circuit_eigenvalues(design, truth)
    rows = []
    row = 0
    for block in design.blocks:
        for pauli in block.paulis:
            estimate = float(estimates.estimates[row])
            rows.append((row, str(block.layer_tuple), pauli.label(), estimate,
                float(true_values[row]), estimate - float(true_values[row])))
            row += 1
    return rows


def save_residuals(rows:list, filepath:str):
    _write_csv(filepath, ["row", "tuple", "pauli", "estimate", "truth", "residual"], rows)



class EstimationReport():
    """Estimated gate noise with optional comparison against the truth.

    Attributes:
        circuit (Circuit): The circuit.
        circuit_estimates (np.ndarray): The circuit eigenvalue estimates.
        row_shots (np.ndarray): The shots of each row.
        log_eigenvalues (np.ndarray): The fitted gate log-eigenvalues.
        gate_eigenvalues (np.ndarray): The fitted gate eigenvalues.
        distributions (dict): The recovered distribution of each gate.
        diagnostics (dict): Fit diagnostics.
        method (str): The fitting method used.
        metrics (dict): NRMSE, per-gate TVDs and per-type median TVDs;
            None if no ground truth was supplied.
    """

    def __init__(self, circuit, estimates, fit, truth = None,
            measurement_budget:float = None, s_prime:float = None):
        """Constructor.

        Args:
            circuit (Circuit): The circuit.
            estimates (CircuitEigenvalueEstimates): The row estimates.
            fit (GateEigenvalueFit): The least squares fit.
            truth (NoiseModel): If supplied, metrics are calculated.
            measurement_budget (float): The measurement budget S.
            s_prime (float): The equivalent basic-design shots S'; needed
                for the NRMSE if truth is supplied.
        """
        self.circuit = circuit
        self.circuit_estimates = estimates.estimates
        self.row_shots = estimates.row_shots
        self.log_eigenvalues = fit.log_eigenvalues
        self.gate_eigenvalues = fit.gate_eigenvalues
        self.method = fit.method_used
        self.diagnostics = fit.diagnostics
        self.distributions = recover_probabilities(circuit, self.gate_eigenvalues)
        self.measurement_budget = measurement_budget
        self.s_prime = s_prime
        self.truth = truth
        self.metrics = None
        if truth is not None:
            if s_prime is None:
                raise ValueError("S' is needed to calculate the NRMSE.")
            self.metrics = report_metrics(circuit, self.gate_eigenvalues,
                    self.distributions, truth, s_prime)


    def to_dict(self) -> dict:
        def encode(value):
            return None if not np.isfinite(value) else float(value)
        output = {"format":"estimation_report", "version":constants.FORMAT_VERSION,
                "method":self.method, "measurement_budget":self.measurement_budget,
                "S_prime":self.s_prime,
                "circuit_eigenvalue_estimates":[encode(v) for v in self.circuit_estimates],
                "row_shots":self.row_shots.tolist(),
                "gate_log_eigenvalues":self.log_eigenvalues.tolist(),
                "gate_eigenvalues":self.gate_eigenvalues.tolist(),
                "distributions":[{"gate_id":list(k), "probabilities":v.tolist()}
                    for k, v in self.distributions.items()],
                "diagnostics":self.diagnostics}
        if self.metrics is not None:
            metrics = dict(self.metrics)
            metrics["gate_tvd"] = [{"gate_id":list(k), "tvd":v}
                    for k, v in self.metrics["gate_tvd"].items()]
            output["metrics"] = metrics
        return output

    def save(self, filepath:str):
        dirname = os.path.dirname(filepath)
        if dirname:
            os.makedirs(dirname, exist_ok=True)
        with open(filepath, "w", encoding="utf-8") as fhandle:
            json.dump(self.to_dict(), fhandle, indent=1)

    def save_distributions(self, filepath:str):
        """Writes gate_id, pauli, p_true, p_est for every error Pauli of
        every gate; p_true is blank without ground truth."""
        rows = []
        for gate_id, probs in self.distributions.items():
            true_probs = None
            if self.truth is not None:
                true_probs = self.truth.channel(gate_id).probabilities
            channel = GateChannel(gate_id, _gate_kind(self.circuit, gate_id), probs,
                    check_input=False)
            for k, label in enumerate(channel.paulis()):
                p_true = "" if true_probs is None else float(true_probs[k])
                rows.append((str(gate_id), label, p_true, float(probs[k])))
        _write_csv(filepath, ["gate_id", "pauli", "p_true", "p_est"], rows)

    def save_metrics(self, filepath:str):
        """Writes one line per gate type: type, count, median TVD, plus the NRMSE."""
        if self.metrics is None:
            raise ValueError("No metrics without ground truth.")
        rows = [("NRMSE", "", self.metrics["nrmse"])]
        for group, median in self.metrics["type_median_tvd"].items():
            rows.append((group, self.metrics["type_counts"][group], median))
        _write_csv(filepath, ["type", "count", "median_tvd"], rows)


def report_metrics(circuit, gate_eigenvalues, distributions:dict, truth:NoiseModel,
        s_prime:float) -> dict:
    """Compares estimates with the true noise.

    Args:
        circuit (Circuit): The circuit.
        gate_eigenvalues (np.ndarray): The estimated gate eigenvalues.
        distributions (dict): The recovered distributions.
        truth (NoiseModel): The true noise model.
        s_prime (float): The equivalent basic-design shots S'.

    Returns:
        metrics (dict): nrmse = sqrt(S'/N) ||estimate - truth||_2, gate_tvd
            per gate id, type_median_tvd and type_counts per gate type.

    Raises:
        ValueError: If the truth does not cover the same gates.
    """
    true_eigs = truth.gate_eigenvalues()
    gate_eigenvalues = np.asarray(gate_eigenvalues, dtype=np.float64)
    if true_eigs.shape != gate_eigenvalues.shape or \
            set(truth.channels) != set(distributions):
        raise ValueError("The true noise model does not match the estimates.")
    num_eigs = true_eigs.shape[0]
    nrmse = float(np.sqrt(s_prime / num_eigs) * np.linalg.norm(gate_eigenvalues - true_eigs))

    gate_tvd, groups = {}, {}
    for gate_id, probs in distributions.items():
        value = tvd(probs, truth.channel(gate_id).probabilities)
        gate_tvd[gate_id] = value
        for group in GATE_TYPE_GROUPS.get(_gate_kind(circuit, gate_id), ("other",)):
            groups.setdefault(group, []).append(value)
    return {"nrmse":nrmse, "gate_tvd":gate_tvd,
            "type_median_tvd":{g:float(np.median(v)) for g, v in groups.items()},
            "type_counts":{g:len(v) for g, v in groups.items()}}
