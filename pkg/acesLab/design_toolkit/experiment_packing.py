"""Pauli preparation sets, T-consistency and the deterministic packing
of a tuple's Pauli preparations into experiments.

Two Paulis are T-consistent if they agree wherever both are non-identity,
both on the prepared Paulis and on the measured (propagated) Paulis. An
experiment is a set of mutually T-consistent Paulis; since consistency is
a per-qubit condition, a Pauli is consistent with every member of an
experiment exactly when it agrees with the experiment's combined
preparation and combined measurement.

Packing first fills each experiment from the Paulis not yet in any
experiment and then from all remaining consistent Paulis, each time
choosing the Pauli whose measurement support overlaps most with the
experiment's measurement support. Candidates are kept in a heap keyed by
(-overlap, sort position), with overlaps incremented eagerly as the
experiment's measurement support grows."""
import heapq

from .propagation import propagate
from ..pauli_toolkit.pauli_strings import PauliString, local_codes
from ..circuits.circuit_classes import validate_tuple



class Experiment():
    """One experiment of a tuple's experiment set.

    Attributes:
        members (tuple): Indices of the Paulis estimated by the experiment,
            in ascending order.
        prep (dict): The combined preparation, qubit -> code.
        meas (dict): The combined measurement, qubit -> code.
    """

    def __init__(self, members, prep:dict, meas:dict):
        self.members = tuple(sorted(members))
        self.prep = dict(prep)
        self.meas = dict(meas)

    def prep_pauli(self, n:int) -> PauliString:
        return PauliString.from_sparse(n, self.prep)

    def meas_pauli(self, n:int) -> PauliString:
        return PauliString.from_sparse(n, self.meas)

    def to_dict(self, n:int) -> dict:
        return {"members":list(self.members),
                "prep":self.prep_pauli(n).label()[1:],
                "meas":self.meas_pauli(n).label()[1:]}


def pauli_preparation_set(circuit, layer_tuple) -> list:
    """The Pauli preparation set Q_T: every non-identity Pauli supported
    on a gate of the rearranged circuit. For the empty tuple this is the
    3n single-qubit Paulis, which estimate the measurement eigenvalues.

    Returns:
        paulis (list): PauliStrings with sign +1, sorted by text_key.
    """
    layer_tuple = validate_tuple(circuit, layer_tuple)
    seen = set()
    if len(layer_tuple) == 0:
        for qubit in range(circuit.n):
            for code in (1, 2, 3):
                seen.add(((qubit, code),))
    for uid in sorted(set(layer_tuple)):
        for gate in circuit.unique_layers[uid].gates:
            for index in range(1, 4**gate.arity):
                codes = local_codes(index, gate.arity)
                seen.add(tuple(sorted((q, c) for q, c in zip(gate.qubits, codes) if c)))
    paulis = [PauliString.from_sparse(circuit.n, dict(item)) for item in seen]
    return sorted(paulis, key=lambda p: p.text_key())


def _agrees(codes:dict, assignment:dict) -> bool:
    for qubit, code in codes.items():
        if assignment.get(qubit, code) != code:
            return False
    return True


def t_consistent(pauli_a:PauliString, pauli_b:PauliString, circuit, layer_tuple) -> bool:
    """Whether two Paulis can be estimated in the same experiment for
    a tuple: they agree on their common preparation support and their
    propagated Paulis agree on their common measurement support."""
    prep_a, prep_b = pauli_a.sparse(), pauli_b.sparse()
    if not _agrees(prep_a, prep_b):
        return False
    meas_a = propagate(circuit, layer_tuple, prep_a).final_codes
    meas_b = propagate(circuit, layer_tuple, prep_b).final_codes
    return _agrees(meas_a, meas_b)


def pack_sorted(preps:list, meas:list) -> list:
    """Packs Paulis, already sorted into priority order, into experiments.

    Args:
        preps (list): The prepared Paulis as dicts qubit -> code.
        meas (list): The corresponding measured Paulis.

    Returns:
        experiments (list): Experiment objects whose members index the
            input lists.
    """
    nitems = len(preps)
    meas_index = {}
    for item, codes in enumerate(meas):
        for qubit in codes:
            meas_index.setdefault(qubit, []).append(item)

    unadded = [True] * nitems
    num_unadded = nitems
    experiments = []
    while num_unadded > 0:
        prep_assign, meas_assign = {}, {}
        overlap = [0] * nitems
        in_experiment = [False] * nitems
        rejected = [False] * nitems
        members = []
        for fill_from_unadded in (True, False):
            def eligible(item):
                return not in_experiment[item] and not rejected[item] and \
                        (unadded[item] or not fill_from_unadded)

            heap = [(-overlap[i], i) for i in range(nitems) if eligible(i)]
            heapq.heapify(heap)
            while heap:
                neg_overlap, item = heapq.heappop(heap)
                if not eligible(item) or -neg_overlap != overlap[item]:
                    continue
                if not _agrees(preps[item], prep_assign) or \
                        not _agrees(meas[item], meas_assign):
                    rejected[item] = True
                    continue
                members.append(item)
                in_experiment[item] = True
                if unadded[item]:
                    unadded[item] = False
                    num_unadded -= 1
                prep_assign.update(preps[item])
                new_qubits = [q for q in meas[item] if q not in meas_assign]
                meas_assign.update(meas[item])
                for qubit in new_qubits:
                    for other in meas_index[qubit]:
                        if in_experiment[other] or rejected[other]:
                            continue
                        overlap[other] += 1
                        if eligible(other):
                            heapq.heappush(heap, (-overlap[other], other))
        experiments.append(Experiment(members, prep_assign, meas_assign))
    return experiments


def packing_order(paulis:list, measured:list) -> list:
    """The order in which Paulis are considered for packing: descending
    measurement support size, ties broken by the text form of the
    prepared Pauli."""
    return sorted(range(len(paulis)), key=lambda i: (-len(measured[i]),
                paulis[i].text_key()))


def pack_experiments(circuit, layer_tuple, paulis:list = None) -> list:
    """Packs a tuple's Pauli preparation set into an experiment set.

    Args:
        circuit (Circuit): The circuit.
        layer_tuple (tuple): The tuple.
        paulis (list): The PauliStrings to pack. If None, the full
            Pauli preparation set is used.

    Returns:
        experiments (list): Experiment objects whose members index the
            supplied (or generated) list of Paulis.

    Raises:
        ValueError: If there are no Paulis to pack.
    """
    layer_tuple = validate_tuple(circuit, layer_tuple)
    if paulis is None:
        paulis = pauli_preparation_set(circuit, layer_tuple)
    if len(paulis) == 0:
        raise ValueError("There are no Paulis to pack.")
    preps = [p.sparse() for p in paulis]
    measured = [propagate(circuit, layer_tuple, codes).final_codes for codes in preps]
    order = packing_order(paulis, measured)
    experiments = pack_sorted([preps[i] for i in order], [measured[i] for i in order])
    return [Experiment([order[m] for m in exp.members], exp.prep, exp.meas)
            for exp in experiments]
