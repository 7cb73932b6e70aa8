"""The GateChannel and NoiseModel classes. A NoiseModel stores one Pauli
channel for each gate of each unique layer of a circuit, plus one
measurement channel per qubit and basis, and supplies the gate eigenvalue
vector in the canonical column order used by the design matrix.

Canonical gate eigenvalue keys are (uid, j, a) for the non-identity local
Pauli index a on gate j of unique layer uid, in lexicographic order,
followed by ("meas", q, basis) for each qubit q and basis X, Y, Z.
Preparations are noiseless; all SPAM error is assigned to measurements."""
import json

import numpy as np

from .walsh_hadamard import wht_forward
from ..pauli_toolkit.pauli_strings import local_label
from ..pauli_toolkit.clifford_gates import SPAM_BASES
from ..constants import constants


def gate_eigenvalue_keys(circuit) -> list:
    """The canonical ordered list of gate eigenvalue keys for a circuit.
    Its length is circuit.gate_eigenvalue_count()."""
    keys = []
    for uid, layer in enumerate(circuit.unique_layers):
        for j, gate in enumerate(layer.gates):
            keys += [(uid, j, a) for a in range(1, 4**gate.arity)]
    for qubit in range(circuit.n):
        keys += [("meas", qubit, basis) for basis in SPAM_BASES]
    return keys


def gate_eigenvalue_index(circuit) -> dict:
    """A dict mapping each canonical gate eigenvalue key to its column."""
    return {key:col for col, key in enumerate(gate_eigenvalue_keys(circuit))}



class GateChannel():
    """The Pauli channel acting before a gate, or the bit-flip channel
    acting on a measurement outcome.

    Attributes:
        gate_id (tuple): (uid, j) for a gate, ("meas", q, basis) for a
            measurement.
        kind (str): The gate kind, or "Meas".
        probabilities (np.ndarray): The error distribution, identity
            first. Length 4^b for a b-qubit gate, 2 for a measurement.
        eigenvalues (np.ndarray): The Pauli eigenvalues, identity first.
            For a measurement, (1, 1 - 2 p_m).
    """

    def __init__(self, gate_id, kind:str, probabilities, check_input:bool = True):
        """Constructor.

        Raises:
            ValueError: If the probabilities are not a valid distribution
                of the right length.
        """
        self.gate_id = tuple(gate_id)
        self.kind = kind
        probabilities = np.asarray(probabilities, dtype=np.float64).copy()
        if kind == "Meas":
            if probabilities.shape != (2,):
                raise ValueError("Measurement channels take (1 - p_m, p_m).")
            if check_input and (np.any(probabilities < 0) or
                    abs(probabilities.sum() - 1) > 1e-12):
                raise ValueError("Measurement error probabilities are invalid.")
            self.eigenvalues = np.array([1.0, probabilities[0] - probabilities[1]])
        else:
            self.eigenvalues = wht_forward(probabilities, check_input)
            self.eigenvalues[0] = 1.0
        probabilities.setflags(write=False)
        self.eigenvalues.setflags(write=False)
        self.probabilities = probabilities

    @property
    def nqubits(self) -> int:
        if self.kind == "Meas":
            return 1
        return (self.probabilities.shape[0].bit_length() - 1) // 2

    def infidelity(self) -> float:
        """The entanglement infidelity, i.e. the total error probability."""
        return float(1 - self.probabilities[0])

    def paulis(self) -> list:
        """Labels of the error Paulis, in the order of the probabilities."""
        if self.kind == "Meas":
            return ["I", self.gate_id[2]]
        return [local_label(a, self.nqubits) for a in range(self.probabilities.shape[0])]

    def to_dict(self) -> dict:
        return {"gate_id":list(self.gate_id), "kind":self.kind,
                "paulis":self.paulis(), "probabilities":self.probabilities.tolist()}

    @classmethod
    def from_dict(cls, channel_dict:dict):
        return cls(channel_dict["gate_id"], channel_dict["kind"],
                channel_dict["probabilities"])



class NoiseModel():
    """Pauli noise for every gate of a circuit, plus measurement noise.

    Attributes:
        circuit (Circuit): The circuit the model describes.
        channels (dict): Maps each gate id to its GateChannel.
        generator (str): The name of the generator that built the model.
        params (dict): The generator parameters.
        seed: The generator seed, or None.
    """

    def __init__(self, circuit, channels:dict, generator:str = "custom",
            params:dict = None, seed = None):
        """Constructor.

        Raises:
            ValueError: If a gate or measurement of the circuit has no
                channel, or a channel does not match its gate.
        """
        self.circuit = circuit
        self.channels = {tuple(k):v for k, v in channels.items()}
        for uid, layer in enumerate(circuit.unique_layers):
            for j, gate in enumerate(layer.gates):
                if (uid, j) not in self.channels:
                    raise ValueError(f"No channel for gate {j} of unique layer {uid}.")
                if self.channels[(uid, j)].nqubits != gate.arity:
                    raise ValueError(f"The channel for gate {j} of unique layer "
                            f"{uid} does not match the gate arity.")
        for qubit in range(circuit.n):
            for basis in SPAM_BASES:
                if ("meas", qubit, basis) not in self.channels:
                    raise ValueError(f"No measurement channel for qubit {qubit}, "
                            f"basis {basis}.")
        self.generator = generator
        self.params = dict(params) if params is not None else {}
        self.seed = seed
        self._eigenvalues = None


    def channel(self, gate_id) -> GateChannel:
        return self.channels[tuple(gate_id)]

    def gate_eigenvalues(self) -> np.ndarray:
        """The gate eigenvalue vector lambda in canonical column order."""
        if self._eigenvalues is None:
            values = []
            for uid, layer in enumerate(self.circuit.unique_layers):
                for j in range(len(layer.gates)):
                    values.append(self.channels[(uid, j)].eigenvalues[1:])
            for qubit in range(self.circuit.n):
                for basis in SPAM_BASES:
                    values.append(self.channels[("meas", qubit, basis)].eigenvalues[1:])
            self._eigenvalues = np.concatenate(values)
            self._eigenvalues.setflags(write=False)
        return self._eigenvalues

    def gate_log_eigenvalues(self) -> np.ndarray:
        """The gate log-eigenvalues x = -log(lambda)."""
        return -np.log(self.gate_eigenvalues())

    def to_dict(self) -> dict:
        return {"format":"noise_model", "version":constants.FORMAT_VERSION,
                "generator":self.generator, "params":self.params, "seed":self.seed,
                "n":self.circuit.n,
                "channels":[c.to_dict() for c in self.channels.values()]}

    @classmethod
    def from_dict(cls, circuit, model_dict:dict):
        """Rebuilds a noise model for a circuit. Eigenvalues are
        recomputed from the stored probabilities.

        Raises:
            ValueError: If the document is not a noise model for this circuit.
        """
        if model_dict.get("format") != "noise_model":
            raise ValueError("The document does not describe a noise model.")
        if model_dict.get("n", circuit.n) != circuit.n:
            raise ValueError("The noise model was built for a different circuit.")
        channels = {}
        for channel_dict in model_dict["channels"]:
            channel = GateChannel.from_dict(channel_dict)
            channels[channel.gate_id] = channel
        return cls(circuit, channels, model_dict.get("generator", "custom"),
                model_dict.get("params"), model_dict.get("seed"))

    def save(self, filepath:str):
        with open(filepath, "w", encoding="utf-8") as fhandle:
            json.dump(self.to_dict(), fhandle)

    @classmethod
    def load(cls, circuit, filepath:str):
        with open(filepath, "r", encoding="utf-8") as fhandle:
            return cls.from_dict(circuit, json.load(fhandle))
