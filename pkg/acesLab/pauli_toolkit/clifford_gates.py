"""The CliffordGate class and tableau-based conjugation of Paulis by
Clifford gates with exact sign tracking.

The conjugation tables for each gate kind are generated once at import
from the images of the single-qubit X and Z generators, which are
hard-coded below. Each table maps a local Pauli index on the gate to
the local index of its image and the sign of the image.
"""
import numpy as np

from .pauli_strings import PauliString, pauli_mul, local_index, local_codes


SINGLE_QUBIT_KINDS = ("I", "X", "Y", "Z", "H", "S", "Meas", "Prep")
TWO_QUBIT_KINDS = ("CX", "CZ")
GATE_KINDS = SINGLE_QUBIT_KINDS + TWO_QUBIT_KINDS
PAULI_KINDS = ("I", "X", "Y", "Z")
SPAM_BASES = ("X", "Y", "Z")

#Images of (X_1, Z_1, X_2, Z_2, ...) under conjugation by each gate.
_GENERATOR_IMAGES = {
        "I":("+X", "+Z"),
        "X":("+X", "-Z"),
        "Y":("-X", "-Z"),
        "Z":("-X", "+Z"),
        "H":("+Z", "+X"),
        "S":("+Y", "+Z"),
        "Meas":("+X", "+Z"),
        "Prep":("+X", "+Z"),
        "CX":("+XX", "+ZI", "+IX", "+ZZ"),
        "CZ":("+XZ", "+ZI", "+ZX", "+IZ"),
}


def _build_table(images:tuple, nqubits:int):
    """Builds the conjugation table for a gate from the images of
    its generators.

    Args:
        images (tuple): The text forms of the images of X_1, Z_1, X_2, Z_2...
        nqubits (int): The number of qubits the gate acts on.

    Returns:
        image_index (np.ndarray): The local index of the image of each
            local Pauli index.
        image_sign (np.ndarray): The sign (+1 or -1) of each image.
    """
    x_images = [PauliString.from_label(images[2*k]) for k in range(nqubits)]
    z_images = [PauliString.from_label(images[2*k+1]) for k in range(nqubits)]
    size = 4**nqubits
    image_index = np.zeros(size, dtype=np.int64)
    image_sign = np.ones(size, dtype=np.int64)
    for index in range(size):
        codes = local_codes(index, nqubits)
        xz_count = sum(1 for c in codes if c == 3)
        image = PauliString(nqubits, 0, 0, xz_count)
        for k, code in enumerate(codes):
            if code >> 1:
                image = pauli_mul(image, x_images[k])
        for k, code in enumerate(codes):
            if code & 1:
                image = pauli_mul(image, z_images[k])
        if not image.is_hermitian():
            raise ValueError("Generator images do not define a Clifford.")
        image_index[index] = local_index([image.get_code(k)
                        for k in range(nqubits)])
        image_sign[index] = image.sign()
    return image_index, image_sign


CONJUGATION_TABLES = {kind:_build_table(images, len(images) // 2)
        for kind, images in _GENERATOR_IMAGES.items()}



class CliffordGate():
    """A Clifford gate acting on specific qubits. Instances are
    immutable and hashable, so that layers can be compared as
    multisets of gates.

    Attributes:
        kind (str): One of GATE_KINDS.
        qubits (tuple): The qubits the gate acts on, control first
            for CX.
        basis (str): The basis for Meas and Prep gates, None otherwise.
    """
    __slots__ = ("kind", "qubits", "basis")

    def __init__(self, kind:str, qubits, basis:str = None):
        """Constructor.

        Raises:
            ValueError: If the kind is unknown, the number of qubits
                does not match the kind, the qubits are not distinct or
                a basis is missing for a measurement or preparation.
        """
        if kind not in GATE_KINDS:
            raise ValueError(f"Unrecognized gate kind {kind}.")
        qubits = tuple(int(q) for q in qubits)
        arity = 2 if kind in TWO_QUBIT_KINDS else 1
        if len(qubits) != arity:
            raise ValueError(f"Gate {kind} acts on {arity} qubits, "
                    f"but {len(qubits)} were supplied.")
        if len(set(qubits)) != len(qubits) or min(qubits) < 0:
            raise ValueError("Gate qubits must be distinct and non-negative.")
        if kind in ("Meas", "Prep"):
            if basis not in SPAM_BASES:
                raise ValueError("Meas and Prep gates require a basis in X, Y, Z.")
        else:
            basis = None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "basis", basis)

    def __setattr__(self, name, value):
        raise AttributeError("CliffordGate objects are immutable.")

    @property
    def arity(self) -> int:
        return len(self.qubits)

    def sort_key(self):
        return (self.qubits, self.kind, self.basis or "")

    def to_dict(self) -> dict:
        output = {"kind":self.kind, "qubits":list(self.qubits)}
        if self.basis is not None:
            output["basis"] = self.basis
        return output

    @classmethod
    def from_dict(cls, gate_dict:dict):
        return cls(gate_dict["kind"], gate_dict["qubits"], gate_dict.get("basis"))

    def __eq__(self, other):
        if not isinstance(other, CliffordGate):
            return NotImplemented
        return (self.kind, self.qubits, self.basis) == \
                (other.kind, other.qubits, other.basis)

    def __hash__(self):
        return hash((self.kind, self.qubits, self.basis))

    def __repr__(self):
        if self.basis is not None:
            return f"CliffordGate('{self.kind}', {self.qubits}, '{self.basis}')"
        return f"CliffordGate('{self.kind}', {self.qubits})"



def conjugate_local(kind:str, index:int):
    """Conjugates a local Pauli index by a gate kind.

    Returns:
        image (int): The local index of the image.
        sign (int): +1 or -1.
    """
    image_index, image_sign = CONJUGATION_TABLES[kind]
    return int(image_index[index]), int(image_sign[index])


def conjugate(gate:CliffordGate, pauli:PauliString) -> PauliString:
    """Returns G P G^dagger in canonical form, with exact sign.

    Raises:
        ValueError: If the gate acts on a qubit outside the Pauli.
    """
    if max(gate.qubits) >= pauli.n:
        raise ValueError("The gate acts on a qubit index out of range.")
    codes = [pauli.get_code(q) for q in gate.qubits]
    image, sign = conjugate_local(gate.kind, local_index(codes))
    x_bits, z_bits = pauli.x_bits, pauli.z_bits
    for qubit, code in zip(gate.qubits, local_codes(image, gate.arity)):
        mask = 1 << qubit
        x_bits = (x_bits & ~mask) | ((code >> 1) << qubit)
        z_bits = (z_bits & ~mask) | ((code & 1) << qubit)
    phase = pauli.phase - (pauli.phase % 2) + (0 if sign > 0 else 2)
    return PauliString(pauli.n, x_bits, z_bits, phase)
