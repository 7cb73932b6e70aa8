"""The PauliString class, which stores an n-qubit Pauli operator as a
pair of packed bit vectors (the X part and the Z part) plus a phase,
together with the symplectic form, Pauli multiplication and the
conversions between full Paulis and the local Pauli indices used to
order gate eigenvalues.

The Pauli with bits (x, z) is P = prod_j i^(x_j z_j) X^(x_j) Z^(z_j),
so that for example Y = iXZ. A PauliString represents i^phase * P.
Bit j of the packed integers refers to qubit j, and in text form
qubit 0 is written leftmost, e.g. "+ZXI" is Z on qubit 0.

Local (gate-level) Pauli indices order the bits as
(x_1, ..., x_b, z_1, ..., z_b), most significant first. For a single
qubit this gives I=0, Z=1, X=2, Y=3.
"""
import numpy as np


#Single-qubit codes are 2 * x + z.
CODE_TO_LETTER = ("I", "Z", "X", "Y")
LETTER_TO_CODE = {"I":0, "Z":1, "X":2, "Y":3}
#Rank of each single-qubit code in the text ordering I < X < Y < Z.
CODE_TEXT_RANK = (0, 3, 1, 2)


class PauliString():
    """An n-qubit Pauli operator with a phase, stored as packed
    bit vectors. Instances are immutable and hashable.

    Attributes:
        n (int): The number of qubits.
        x_bits (int): The X part as a packed bit vector; bit j is qubit j.
        z_bits (int): The Z part as a packed bit vector.
        phase (int): The power of i multiplying the Pauli, mod 4.
    """
    __slots__ = ("n", "x_bits", "z_bits", "phase")

    def __init__(self, n:int, x_bits:int = 0, z_bits:int = 0, phase:int = 0):
        """Constructor.

        Args:
            n (int): The number of qubits.
            x_bits (int): The X part as a packed integer.
            z_bits (int): The Z part as a packed integer.
            phase (int): The power of i, reduced mod 4.

        Raises:
            ValueError: A ValueError is raised if the bit vectors have
                entries beyond qubit n - 1.
        """
        if n < 0:
            raise ValueError("The number of qubits must be non-negative.")
        if x_bits < 0 or z_bits < 0 or x_bits >> n or z_bits >> n:
            raise ValueError("The bit vectors must have exactly n entries.")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "x_bits", int(x_bits))
        object.__setattr__(self, "z_bits", int(z_bits))
        object.__setattr__(self, "phase", int(phase) % 4)

    def __setattr__(self, name, value):
        raise AttributeError("PauliString objects are immutable.")

    @classmethod
    def identity(cls, n:int):
        """The n-qubit identity."""
        return cls(n)

    @classmethod
    def from_label(cls, label:str):
        """Builds a Pauli from its text form, e.g. "+ZXI" or "-XY".
        A missing sign is read as "+"."""
        sign = 0
        if label[:1] in ("+", "-"):
            sign = 2 if label[0] == "-" else 0
            label = label[1:]
        x_bits, z_bits = 0, 0
        for j, letter in enumerate(label):
            if letter not in LETTER_TO_CODE:
                raise ValueError(f"Unrecognized Pauli letter {letter}.")
            code = LETTER_TO_CODE[letter]
            x_bits |= (code >> 1) << j
            z_bits |= (code & 1) << j
        return cls(len(label), x_bits, z_bits, sign)

    @classmethod
    def from_sparse(cls, n:int, codes:dict, sign:int = 1):
        """Builds a Pauli from a dict mapping qubit to single-qubit
        code (2x + z), with sign +1 or -1."""
        x_bits, z_bits = 0, 0
        for qubit, code in codes.items():
            if qubit < 0 or qubit >= n:
                raise ValueError("Qubit index out of range.")
            x_bits |= (code >> 1) << qubit
            z_bits |= (code & 1) << qubit
        return cls(n, x_bits, z_bits, 0 if sign > 0 else 2)

    def get_code(self, qubit:int) -> int:
        """The single-qubit code (2x + z) on a given qubit."""
        return (((self.x_bits >> qubit) & 1) << 1) | ((self.z_bits >> qubit) & 1)

    def sparse(self) -> dict:
        """A dict mapping each qubit in the support to its code."""
        return {q:self.get_code(q) for q in self.support()}

    def support(self) -> list:
        """The sorted list of qubits on which the Pauli is not the identity."""
        bits = self.x_bits | self.z_bits
        qubits = []
        while bits:
            low = bits & -bits
            qubits.append(low.bit_length() - 1)
            bits ^= low
        return qubits

    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    def sign(self) -> int:
        """The sign of a Hermitian Pauli."""
        if not self.is_hermitian():
            raise ValueError("The Pauli is not Hermitian and has no sign.")
        return 1 if self.phase == 0 else -1

    def canonicalise(self):
        """Returns the Hermitian canonical form, with phase 0 or 2.
        Any factor of i is dropped."""
        return PauliString(self.n, self.x_bits, self.z_bits,
                self.phase - (self.phase % 2))

    def unsigned(self):
        """The same Pauli with phase 0."""
        return PauliString(self.n, self.x_bits, self.z_bits, 0)

    def x_vector(self) -> np.ndarray:
        """The X part as a length n uint8 array."""
        return np.array([(self.x_bits >> j) & 1 for j in range(self.n)],
                dtype=np.uint8)

    def z_vector(self) -> np.ndarray:
        """The Z part as a length n uint8 array."""
        return np.array([(self.z_bits >> j) & 1 for j in range(self.n)],
                dtype=np.uint8)

    def label(self) -> str:
        """The text form, e.g. "+ZXI". Non-Hermitian Paulis carry an
        "i" or "-i" prefix."""
        prefix = ("+", "+i", "-", "-i")[self.phase]
        return prefix + "".join(CODE_TO_LETTER[self.get_code(j)]
                for j in range(self.n))

    def text_key(self) -> tuple:
        """A sort key equivalent to comparing the unsigned text forms
        lexicographically with I < X < Y < Z, computed from the
        support only."""
        return tuple((-q, CODE_TEXT_RANK[self.get_code(q)])
                for q in self.support())

    def __mul__(self, other):
        return pauli_mul(self, other)

    def __eq__(self, other):
        if not isinstance(other, PauliString):
            return NotImplemented
        return (self.n, self.x_bits, self.z_bits, self.phase) == \
                (other.n, other.x_bits, other.z_bits, other.phase)

    def __hash__(self):
        return hash((self.n, self.x_bits, self.z_bits, self.phase))

    def __str__(self):
        return self.label()

    def __repr__(self):
        return f"PauliString('{self.label()}')"



def symplectic_form(a:PauliString, b:PauliString) -> int:
    """The symplectic form a_x . b_z + a_z . b_x mod 2, which is
    0 if the two Paulis commute and 1 if they anticommute.

    Raises:
        ValueError: If the Paulis act on different numbers of qubits.
    """
    if a.n != b.n:
        raise ValueError("The Paulis act on different numbers of qubits.")
    return ((a.x_bits & b.z_bits).bit_count() +
            (a.z_bits & b.x_bits).bit_count()) % 2


def pauli_mul(a:PauliString, b:PauliString) -> PauliString:
    """Multiplies two Paulis, tracking the phase exactly mod 4.

    Raises:
        ValueError: If the Paulis act on different numbers of qubits.
    """
    if a.n != b.n:
        raise ValueError("The Paulis act on different numbers of qubits.")
    x_bits = a.x_bits ^ b.x_bits
    z_bits = a.z_bits ^ b.z_bits
    phase = a.phase + b.phase + (a.x_bits & a.z_bits).bit_count() + \
            (b.x_bits & b.z_bits).bit_count() + \
            2 * (a.z_bits & b.x_bits).bit_count() - \
            (x_bits & z_bits).bit_count()
    return PauliString(a.n, x_bits, z_bits, phase)


def support(a:PauliString) -> set:
    """The set of qubits on which the Pauli acts nontrivially."""
    return set(a.support())


def local_index(codes) -> int:
    """Converts a sequence of single-qubit codes, one per gate qubit,
    to the local Pauli index on the gate."""
    nqubits = len(codes)
    index = 0
    for k, code in enumerate(codes):
        index |= (code >> 1) << (2 * nqubits - 1 - k)
        index |= (code & 1) << (nqubits - 1 - k)
    return index


def local_codes(index:int, nqubits:int) -> tuple:
    """Converts a local Pauli index on a gate with nqubits qubits
    back into one single-qubit code per gate qubit."""
    return tuple((((index >> (2 * nqubits - 1 - k)) & 1) << 1) |
            ((index >> (nqubits - 1 - k)) & 1) for k in range(nqubits))


def local_label(index:int, nqubits:int) -> str:
    """The text form (without sign) of a local Pauli index."""
    return "".join(CODE_TO_LETTER[c] for c in local_codes(index, nqubits))


def local_symplectic_matrix(nqubits:int) -> np.ndarray:
    """The matrix of symplectic forms between all pairs of local Pauli
    indices on nqubits qubits, as a (4^nqubits, 4^nqubits) array of 0/1."""
    size = 4**nqubits
    idx = np.arange(size)
    xpart = idx >> nqubits
    zpart = idx & ((1 << nqubits) - 1)
    overlap = (xpart[:,None] & zpart[None,:]) ^ (zpart[:,None] & xpart[None,:])
    parity = np.zeros((size, size), dtype=np.int64)
    for k in range(nqubits):
        parity ^= (overlap >> k) & 1
    return parity
