"""Propagation of Paulis through rearranged circuits. A Pauli is tracked
layer by layer in sparse form (a dict mapping qubit to single-qubit code);
noise acts before each gate, so every gate whose support meets the current
Pauli contributes its gate eigenvalue for the restriction of the Pauli to
the gate. The final Pauli is measured, contributing one measurement
eigenvalue for each qubit in its support.

Tuples built by repeating a short pattern are propagated one period at a
time; since Clifford propagation is a bijection, the Pauli returns to its
starting value after some number of periods and the column counts of the
remaining periods can be read off from the cycle."""
from ..pauli_toolkit.clifford_gates import CONJUGATION_TABLES
from ..pauli_toolkit.pauli_strings import local_index, local_codes
from ..circuits.circuit_classes import minimal_period


#Conjugation tables as plain lists, for fast scalar lookups.
_TABLES = {kind:(table[0].tolist(), table[1].tolist())
        for kind, table in CONJUGATION_TABLES.items()}

CODE_TO_BASIS = {1:"Z", 2:"X", 3:"Y"}
BASIS_TO_CODE = {"Z":1, "X":2, "Y":3}



class PropagationResult():
    """The outcome of propagating a Pauli through a rearranged circuit.

    Attributes:
        final_codes (dict): The measured Pauli T(a), qubit -> code.
        sign (int): The sign of T(a), +1 or -1.
        gate_counts (dict): Maps (uid, j, a) to the number of times the
            gate eigenvalue is picked up.
        touched (set): The (uid, j) gates met by the Pauli at any point.
    """

    def __init__(self, final_codes, sign, gate_counts, touched):
        self.final_codes = final_codes
        self.sign = sign
        self.gate_counts = gate_counts
        self.touched = touched

    def measured_support(self) -> frozenset:
        return frozenset(self.final_codes)

    def spam_keys(self) -> list:
        """The measurement eigenvalue keys picked up by the measurement."""
        return [("meas", q, CODE_TO_BASIS[c]) for q, c in sorted(self.final_codes.items())]

    def column_counts(self, col_index:dict) -> dict:
        """The design matrix row, as a dict mapping column to power."""
        row = {}
        for key, count in self.gate_counts.items():
            col = col_index[key]
            row[col] = row.get(col, 0) + count
        for key in self.spam_keys():
            col = col_index[key]
            row[col] = row.get(col, 0) + 1
        return row



def _propagate_layers(circuit, layer_tuple, codes:dict, sign:int,
        gate_counts:dict, touched:set):
    """Propagates a sparse Pauli through the layers of a tuple, updating
    gate_counts and touched in place. Returns the final codes and sign."""
    for uid in layer_tuple:
        gates = circuit.unique_layers[uid].gates
        gate_map = circuit.gate_map(uid)
        gate_ids = sorted({gate_map[q] for q in codes})
        for j in gate_ids:
            gate = gates[j]
            restricted = [codes.get(q, 0) for q in gate.qubits]
            index = local_index(restricted)
            key = (uid, j, index)
            gate_counts[key] = gate_counts.get(key, 0) + 1
            touched.add((uid, j))
            image_index, image_sign = _TABLES[gate.kind]
            image = image_index[index]
            sign *= image_sign[index]
            for qubit, code in zip(gate.qubits, local_codes(image, gate.arity)):
                if code:
                    codes[qubit] = code
                else:
                    codes.pop(qubit, None)
    return codes, sign


def propagate(circuit, layer_tuple, codes:dict, sign:int = 1) -> PropagationResult:
    """Propagates the Pauli with the given sparse codes through the
    circuit rearranged by a tuple.

    Args:
        circuit (Circuit): The circuit.
        layer_tuple (tuple): A valid tuple of unique layer ids.
        codes (dict): The prepared Pauli, qubit -> code (2x + z).
        sign (int): Its sign.

    Returns:
        result (PropagationResult): The measured Pauli, its sign, and the
            gate eigenvalues picked up along the way.
    """
    codes = {q:c for q, c in codes.items() if c}
    layer_tuple = tuple(layer_tuple)
    gate_counts, touched = {}, set()
    if len(layer_tuple) == 0:
        return PropagationResult(codes, sign, gate_counts, touched)

    period = minimal_period(layer_tuple)
    num_periods = len(layer_tuple) // period
    pattern = layer_tuple[:period]
    if num_periods == 1:
        codes, sign = _propagate_layers(circuit, pattern, codes, sign,
                gate_counts, touched)
        return PropagationResult(codes, sign, gate_counts, touched)

    #Sign factors depend only on the Pauli being conjugated, so they
    #repeat with the codes.
    start_codes = dict(codes)
    period_counts, period_factors, period_codes = [], [], []
    factor = 1
    while len(period_counts) < num_periods:
        counts = {}
        codes, factor = _propagate_layers(circuit, pattern, codes, factor,
                counts, touched)
        period_counts.append(counts)
        period_factors.append(factor)
        period_codes.append(dict(codes))
        if codes == start_codes:
            break

    cycle = len(period_counts)
    full_cycles, remainder = divmod(num_periods, cycle)
    for k, counts in enumerate(period_counts):
        multiplier = full_cycles + (1 if k < remainder else 0)
        for key, count in counts.items():
            gate_counts[key] = gate_counts.get(key, 0) + count * multiplier

    final_sign = sign * period_factors[cycle - 1]**full_cycles
    if remainder > 0:
        final_sign *= period_factors[remainder - 1]
        final_codes = period_codes[remainder - 1]
    else:
        final_codes = period_codes[cycle - 1]
    return PropagationResult(dict(final_codes), final_sign, gate_counts, touched)


def propagate_pauli(circuit, layer_tuple, pauli) -> PropagationResult:
    """Propagates a PauliString, keeping its sign."""
    return propagate(circuit, layer_tuple, pauli.sparse(), pauli.sign())
