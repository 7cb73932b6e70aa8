"""Describes the Layer and Circuit classes used to represent layered
Clifford circuits, together with the tuple operations (rearranging a
circuit by a tuple of unique layer ids and calculating the duration
of a tuple).

Layers are identified with one another if they contain the same gates,
and each distinct layer is assigned a unique layer id in order of its
first appearance. A tuple is simply a sequence of unique layer ids."""
import json

from ..pauli_toolkit.clifford_gates import CliffordGate, TWO_QUBIT_KINDS
from ..constants import constants


LAYER_CLASSES = ("single_qubit", "two_qubit", "dynamical_decoupling", "spam")



class Layer():
    """A layer of Clifford gates acting on disjoint sets of qubits.

    Attributes:
        gates (tuple): The CliffordGate objects, sorted by their qubits.
            The position of a gate in this tuple is its gate index.
        layer_time (float): The time taken to implement the layer.
        layer_class (str): One of LAYER_CLASSES.
    """

    def __init__(self, gates, layer_time:float, layer_class:str = None):
        """Constructor.

        Args:
            gates: An iterable of CliffordGate objects.
            layer_time (float): The layer time in seconds (or in any
                consistent unit, for toy circuits).
            layer_class (str): One of LAYER_CLASSES. If None, it is
                "two_qubit" if the layer contains a two-qubit gate and
                "single_qubit" otherwise.

        Raises:
            ValueError: If gates overlap or the layer class is not recognized.
        """
        self.gates = tuple(sorted(gates, key = lambda g: g.sort_key()))
        used = set()
        for gate in self.gates:
            if used.intersection(gate.qubits):
                raise ValueError("Gates within a layer must act on disjoint qubits.")
            used.update(gate.qubits)
        if layer_time < 0:
            raise ValueError("Layer times must be non-negative.")
        self.layer_time = float(layer_time)
        if layer_class is None:
            if any(g.kind in TWO_QUBIT_KINDS for g in self.gates):
                layer_class = "two_qubit"
            else:
                layer_class = "single_qubit"
        if layer_class not in LAYER_CLASSES:
            raise ValueError(f"Unrecognized layer class {layer_class}.")
        self.layer_class = layer_class
        self._qubits = used

    def qubits(self) -> set:
        return set(self._qubits)

    def is_multi_qubit(self) -> bool:
        return any(g.arity > 1 for g in self.gates)

    def gate_signature(self) -> tuple:
        """A hashable description of the gate multiset, used to
        identify identical layers."""
        return self.gates

    def to_dict(self) -> dict:
        return {"class":self.layer_class, "time_ns":self.layer_time * 1e9,
                "gates":[g.to_dict() for g in self.gates]}

    @classmethod
    def from_dict(cls, layer_dict:dict):
        return cls([CliffordGate.from_dict(g) for g in layer_dict["gates"]],
                layer_dict["time_ns"] * 1e-9, layer_dict["class"])



class Circuit():
    """A layered Clifford circuit on n qubits with unique layer indexing.

    Attributes:
        n (int): The number of qubits.
        layers (tuple): The Layer objects in circuit order.
        unique_index (tuple): For each layer position, its unique layer id.
        unique_layers (tuple): For each unique layer id, the Layer.
        meas_reset_time (float): The time for a round of measurement and reset.
        dynamically_decoupled (bool): Whether the circuit contains a
            dynamical decoupling layer.
        metadata (dict): Generator name and parameters, if any.
    """

    def __init__(self, n:int, layers, meas_reset_time:float = constants.MEAS_RESET_TIME,
            dynamically_decoupled:bool = False, metadata:dict = None):
        """Constructor.

        Raises:
            ValueError: If any layer does not cover exactly the n qubits.
        """
        self.n = int(n)
        self.layers = tuple(layers)
        if len(self.layers) == 0:
            raise ValueError("A circuit must contain at least one layer.")
        for layer in self.layers:
            qubits = layer.qubits()
            if len(qubits) != self.n or min(qubits) < 0 or max(qubits) >= self.n:
                raise ValueError("Every layer must cover all n qubits; pad idle "
                        "qubits with identity gates.")
        if meas_reset_time < 0:
            raise ValueError("The measurement and reset time must be non-negative.")
        self.meas_reset_time = float(meas_reset_time)
        self.dynamically_decoupled = bool(dynamically_decoupled)
        self.metadata = dict(metadata) if metadata is not None else {}

        signatures, unique_layers, unique_index = {}, [], []
        for layer in self.layers:
            signature = layer.gate_signature()
            if signature not in signatures:
                signatures[signature] = len(unique_layers)
                unique_layers.append(layer)
            unique_index.append(signatures[signature])
        self.unique_layers = tuple(unique_layers)
        self.unique_index = tuple(unique_index)
        self._gate_maps = {}


    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def num_unique(self) -> int:
        return len(self.unique_layers)

    def unique_ids(self) -> list:
        return list(range(self.num_unique))

    def position_to_unique(self, position:int) -> int:
        """Converts a 1-based layer position, as used in circuit diagrams,
        to a unique layer id."""
        if position < 1 or position > self.num_layers:
            raise ValueError("Layer position out of range.")
        return self.unique_index[position - 1]

    def gate_map(self, uid:int) -> dict:
        """A dict mapping each qubit to the index of the gate acting on it
        in the unique layer uid."""
        if uid not in self._gate_maps:
            mapping = {}
            for j, gate in enumerate(self.unique_layers[uid].gates):
                for qubit in gate.qubits:
                    mapping[qubit] = j
            self._gate_maps[uid] = mapping
        return self._gate_maps[uid]

    def multi_qubit_ids(self) -> list:
        return [u for u, layer in enumerate(self.unique_layers)
                if layer.is_multi_qubit()]

    def dd_layer_id(self):
        """The unique id of the dynamical decoupling layer, or None."""
        for u, layer in enumerate(self.unique_layers):
            if layer.layer_class == "dynamical_decoupling":
                return u
        return None

    def gate_eigenvalue_count(self) -> int:
        """The number of gate eigenvalues N, including the 3n
        measurement (SPAM) eigenvalues."""
        total = 3 * self.n
        for layer in self.unique_layers:
            total += sum(4**g.arity - 1 for g in layer.gates)
        return total

    def summary(self) -> dict:
        return {"n":self.n, "layers":self.num_layers, "unique_layers":self.num_unique,
                "N":self.gate_eigenvalue_count(),
                "dynamically_decoupled":self.dynamically_decoupled}

    def to_dict(self) -> dict:
        return {"format":"circuit", "version":constants.FORMAT_VERSION,
                "n":self.n, "meas_reset_time_ns":self.meas_reset_time * 1e9,
                "dynamically_decoupled":self.dynamically_decoupled,
                "metadata":self.metadata,
                "layers":[layer.to_dict() for layer in self.layers],
                "unique_index":list(self.unique_index)}

    @classmethod
    def from_dict(cls, circuit_dict:dict):
        """Rebuilds a circuit from its JSON dict.

        Raises:
            ValueError: If the document is not a circuit or the stored
                unique index does not match the layers.
        """
        if circuit_dict.get("format") != "circuit":
            raise ValueError("The document does not describe a circuit.")
        circuit = cls(circuit_dict["n"],
                [Layer.from_dict(l) for l in circuit_dict["layers"]],
                circuit_dict["meas_reset_time_ns"] * 1e-9,
                circuit_dict.get("dynamically_decoupled", False),
                circuit_dict.get("metadata"))
        if "unique_index" in circuit_dict and \
                list(circuit.unique_index) != list(circuit_dict["unique_index"]):
            raise ValueError("The stored unique layer index does not match "
                    "the circuit layers.")
        return circuit

    def save(self, filepath:str):
        with open(filepath, "w", encoding="utf-8") as fhandle:
            json.dump(self.to_dict(), fhandle, indent=1)

    @classmethod
    def load(cls, filepath:str):
        with open(filepath, "r", encoding="utf-8") as fhandle:
            return cls.from_dict(json.load(fhandle))



def validate_tuple(circuit:Circuit, layer_tuple) -> tuple:
    """Checks that every entry of a tuple is a unique layer id of
    the circuit and returns it as a tuple of ints.

    Raises:
        ValueError: If an entry is not a unique layer id.
    """
    layer_tuple = tuple(int(u) for u in layer_tuple)
    for uid in layer_tuple:
        if uid < 0 or uid >= circuit.num_unique:
            raise ValueError(f"Unknown unique layer id {uid}.")
    return layer_tuple


def rearrange(circuit:Circuit, layer_tuple) -> list:
    """Returns the list of layers [C_T1, ..., C_TL] described by a tuple.
    The empty tuple gives the empty list."""
    layer_tuple = validate_tuple(circuit, layer_tuple)
    return [circuit.unique_layers[u] for u in layer_tuple]


def tuple_duration(circuit:Circuit, layer_tuple) -> float:
    """The time taken by one shot of a tuple: the layer times plus a
    single round of measurement and reset."""
    layer_tuple = validate_tuple(circuit, layer_tuple)
    return sum(circuit.unique_layers[u].layer_time for u in layer_tuple) + \
            circuit.meas_reset_time


def minimal_period(layer_tuple) -> int:
    """The length of the shortest prefix which, repeated, gives the tuple."""
    length = len(layer_tuple)
    for period in range(1, length + 1):
        if length % period == 0 and \
                all(layer_tuple[i] == layer_tuple[i % period] for i in range(length)):
            return period
    return max(length, 1)
