"""Describes the TupleBlock and ExperimentalDesign classes, which hold
everything defining an ACES experiment: the tuple set, the shot weights,
the packed experiment sets and the sparse design matrix A, together with
the builder functions for the basic tuple set, the bundled reference
design and the transfer of designs between circuits of the same family.

Each row of the design matrix corresponds to a (tuple, Pauli) pair and
each column to a gate eigenvalue in the canonical order of
noise_toolkit.noise_model.gate_eigenvalue_keys. Rows are grouped by tuple
and, within a tuple, sorted in packing order."""
import copy
import json
import warnings
from importlib import resources

import numpy as np
from scipy import sparse
from scipy.linalg import qr

from .propagation import propagate
from .experiment_packing import (pauli_preparation_set, packing_order,
        pack_sorted, Experiment)
from ..circuits.circuit_classes import Circuit, validate_tuple, tuple_duration
from ..circuits.circuit_generators import build_rotated_surface_circuit
from ..noise_toolkit.noise_model import gate_eigenvalue_keys
from ..exceptions import SizeGuardError
from ..constants import constants


#The largest power we store in the 16-bit design matrix.
MAX_DESIGN_ENTRY = np.iinfo(np.int16).max



class TupleBlock():
    """The rows of the design matrix, the experiment set and the
    co-measured pairs for a single tuple.

    Attributes:
        layer_tuple (tuple): The tuple.
        duration (float): The time taken by one shot.
        paulis (list): The prepared PauliStrings, in row order.
        measured (list): The measured Paulis T(a) as dicts qubit -> code.
        signs (np.ndarray): The sign of each T(a).
        experiments (list): The Experiment objects; members index rows.
        counts (np.ndarray): The number of experiments measuring each row.
        matrix (csr_matrix): The (rows, N) block of the design matrix.
    """

    def __init__(self, circuit:Circuit, layer_tuple, col_index:dict):
        """Constructor.

        Raises:
            ValueError: If the tuple is invalid or a power overflows the
                16-bit storage.
        """
        self.layer_tuple = validate_tuple(circuit, layer_tuple)
        self.duration = tuple_duration(circuit, self.layer_tuple)
        self._circuit = circuit
        self._col_index = col_index

        paulis = pauli_preparation_set(circuit, self.layer_tuple)
        results = [propagate(circuit, self.layer_tuple, p.sparse()) for p in paulis]
        order = packing_order(paulis, [r.final_codes for r in results])
        self.paulis = [paulis[i] for i in order]
        results = [results[i] for i in order]
        self.measured = [r.final_codes for r in results]
        self.signs = np.array([r.sign for r in results], dtype=np.int8)
        self._touched = [r.touched for r in results]

        indptr, indices, data = [0], [], []
        for result in results:
            row = result.column_counts(col_index)
            cols = sorted(row)
            indices += cols
            data += [row[c] for c in cols]
            indptr.append(len(indices))
        if len(data) > 0 and max(data) > MAX_DESIGN_ENTRY:
            raise ValueError("A design matrix entry exceeds the 16-bit storage; "
                    "reduce the tuple repetitions.")
        self.matrix = sparse.csr_matrix((np.array(data, dtype=np.int16),
            np.array(indices, dtype=np.int32), np.array(indptr, dtype=np.int32)),
            shape=(len(results), len(col_index)))

        self.experiments = pack_sorted([p.sparse() for p in self.paulis], self.measured)
        self.counts = np.zeros(len(self.paulis), dtype=np.int64)
        for experiment in self.experiments:
            self.counts[list(experiment.members)] += 1
        self._pairs = None


    @property
    def num_rows(self) -> int:
        return len(self.paulis)

    @property
    def num_experiments(self) -> int:
        return len(self.experiments)

    def pair_data(self):
        """The pairs of distinct rows which are measured together and whose
        Paulis meet the same gate or measured qubit, so that their estimators
        may covary. Computed on first use.

        Returns:
            pair_rows (np.ndarray): A (P, 2) array of local row indices,
                first index smaller.
            pair_counts (np.ndarray): The number of experiments measuring
                both rows of each pair.
            pair_matrix (csr_matrix): The (P, N) design rows of the
                product Pauli of each pair.
        """
        if self._pairs is not None:
            return self._pairs
        pair_counts = {}
        for experiment in self.experiments:
            groups = {}
            for member in experiment.members:
                for gate in self._touched[member]:
                    groups.setdefault(gate, []).append(member)
                for qubit in self.measured[member]:
                    groups.setdefault(("meas", qubit), []).append(member)
            experiment_pairs = set()
            for members in groups.values():
                for k, first in enumerate(members):
                    for second in members[k+1:]:
                        experiment_pairs.add((min(first, second), max(first, second)))
            for pair in experiment_pairs:
                pair_counts[pair] = pair_counts.get(pair, 0) + 1

        pairs = sorted(pair_counts)
        indptr, indices, data = [0], [], []
        for first, second in pairs:
            prep_a, prep_b = self.paulis[first].sparse(), self.paulis[second].sparse()
            combined = {q:prep_a.get(q, 0) ^ prep_b.get(q, 0)
                    for q in set(prep_a) | set(prep_b)}
            row = propagate(self._circuit, self.layer_tuple,
                    combined).column_counts(self._col_index)
            cols = sorted(row)
            indices += cols
            data += [row[c] for c in cols]
            indptr.append(len(indices))
        pair_rows = np.array(pairs, dtype=np.int64).reshape(-1, 2)
        counts = np.array([pair_counts[p] for p in pairs], dtype=np.int64)
        pair_matrix = sparse.csr_matrix((np.array(data, dtype=np.float64),
            np.array(indices, dtype=np.int32), np.array(indptr, dtype=np.int32)),
            shape=(len(pairs), len(self._col_index)))
        self._pairs = (pair_rows, counts, pair_matrix)
        return self._pairs



class DesignBlockCache():
    """Caches TupleBlocks for one circuit, so that designs sharing
    tuples only pack and propagate each tuple once."""

    def __init__(self, circuit:Circuit):
        self.circuit = circuit
        self.col_keys = gate_eigenvalue_keys(circuit)
        self.col_index = {key:col for col, key in enumerate(self.col_keys)}
        self._blocks = {}

    def get(self, layer_tuple) -> TupleBlock:
        layer_tuple = tuple(int(u) for u in layer_tuple)
        if layer_tuple not in self._blocks:
            self._blocks[layer_tuple] = TupleBlock(self.circuit, layer_tuple,
                    self.col_index)
        return self._blocks[layer_tuple]

    def __len__(self):
        return len(self._blocks)



class ExperimentalDesign():
    """An ACES experimental design: a tuple set with shot weights and
    the design matrix and experiment sets it defines.

    Attributes:
        circuit (Circuit): The circuit being characterised.
        blocks (list): The TupleBlock of each tuple.
        tuples (list): The tuples.
        shot_weights (np.ndarray): Non-negative weights summing to 1.
        durations (np.ndarray): The duration of each tuple.
        col_keys (list): The gate eigenvalue key of each column.
        design_matrix (csr_matrix): The (M, N) design matrix.
        row_offsets (np.ndarray): The first row of each tuple, with the
            total row count appended.
        basic_time_factor (float): The time factor of the basic tuple set
            under its default shot weights.
        deficient_columns (list): Columns found to be unidentifiable
            when the design was built with a rank check, else empty.
    """

    def __init__(self, circuit:Circuit, blocks:list, shot_weights = None):
        """Constructor.

        Raises:
            ValueError: If the tuple set is empty or contains duplicates,
                or the shot weights are invalid.
        """
        if len(blocks) == 0:
            raise ValueError("A design needs at least one tuple.")
        self.circuit = circuit
        self.blocks = list(blocks)
        self.tuples = [b.layer_tuple for b in self.blocks]
        if len(set(self.tuples)) != len(self.tuples):
            raise ValueError("The tuple set contains duplicate tuples.")
        self.durations = np.array([b.duration for b in self.blocks])
        self.col_keys = gate_eigenvalue_keys(circuit)
        if shot_weights is None:
            shot_weights = default_shot_weights(self.durations)
        self.shot_weights = self.check_weights(shot_weights)
        self.row_offsets = np.cumsum([0] + [b.num_rows for b in self.blocks])
        self.design_matrix = sparse.vstack([b.matrix for b in self.blocks],
                format="csr")
        self.basic_time_factor = basic_time_factor(circuit)
        self.deficient_columns = []
        self.row_tuple = np.repeat(np.arange(len(self.blocks)),
                [b.num_rows for b in self.blocks])
        self.row_counts = np.concatenate([b.counts for b in self.blocks])


    def check_weights(self, shot_weights) -> np.ndarray:
        """Validates shot weights for this design and normalises them."""
        shot_weights = np.asarray(shot_weights, dtype=np.float64)
        if shot_weights.shape != (len(self.blocks),):
            raise ValueError("There must be one shot weight per tuple.")
        if np.any(shot_weights < 0) or shot_weights.sum() <= 0 or \
                not np.all(np.isfinite(shot_weights)):
            raise ValueError("Shot weights must be non-negative with positive sum.")
        return shot_weights / shot_weights.sum()

    @property
    def num_rows(self) -> int:
        return int(self.row_offsets[-1])

    @property
    def num_cols(self) -> int:
        return len(self.col_keys)

    def num_experiments(self) -> int:
        return sum(b.num_experiments for b in self.blocks)

    def experiment_counts(self) -> np.ndarray:
        return np.array([b.num_experiments for b in self.blocks], dtype=np.int64)

    def row_index(self, tuple_number:int, pauli) -> int:
        """The design matrix row of a (tuple, Pauli) pair.

        Raises:
            KeyError: If the Pauli is not in the tuple's preparation set.
        """
        block = self.blocks[tuple_number]
        target = pauli.unsigned()
        for k, candidate in enumerate(block.paulis):
            if candidate == target:
                return int(self.row_offsets[tuple_number]) + k
        raise KeyError("The Pauli is not prepared for this tuple.")

    def with_shot_weights(self, shot_weights):
        """A copy of the design with new shot weights, sharing its blocks
        and design matrix."""
        new_design = copy.copy(self)
        new_design.shot_weights = self.check_weights(shot_weights)
        return new_design

    def time_factor(self, shot_weights = None) -> float:
        """The time factor sum_T Gamma_T tau_T."""
        if shot_weights is None:
            shot_weights = self.shot_weights
        return float(np.dot(shot_weights, self.durations))

    def shots_ratio(self, shot_weights = None) -> float:
        """The ratio S' / S of measurement shots to measurement budget,
        tau_(T, Gamma) / tau_(T_I)."""
        return self.time_factor(shot_weights) / self.basic_time_factor

    def experiment_budgets(self, measurement_budget:float = 1.0) -> np.ndarray:
        """The (unrounded) budget S_T = S Gamma_T / |E_T| of each experiment
        of each tuple."""
        if measurement_budget <= 0:
            raise ValueError("The measurement budget must be positive.")
        return measurement_budget * self.shot_weights / self.experiment_counts()

    def shot_allocation(self, measurement_budget:float) -> dict:
        """Allocates a measurement budget S to the experiments.

        Returns:
            allocation (dict): Contains "S", "S_prime" (the equivalent
                number of basic-design shots S' = S tau_(T,Gamma) / tau_(T_I)),
                "per_experiment" (S_T rounded down, per tuple) and "lost"
                (the shots dropped by rounding).

        Raises:
            ValueError: If the budget is not positive.
        """
        budgets = self.experiment_budgets(measurement_budget)
        per_experiment = np.floor(budgets).astype(np.int64)
        used = int((per_experiment * self.experiment_counts()).sum())
        return {"S":measurement_budget,
                "S_prime":measurement_budget * self.shots_ratio(),
                "per_experiment":per_experiment,
                "lost":float(measurement_budget - used)}

    def check_rank(self) -> list:
        """Finds columns of the design matrix which cannot be identified,
        using a pivoted QR decomposition of the normal matrix. Columns
        with no entries are always reported.

        Returns:
            deficient_columns (list): Sorted column indices; empty if the
                design matrix has full column rank.

        Raises:
            SizeGuardError: If the design is too large for the dense check.
        """
        if self.num_cols > constants.MAX_DISTRIBUTION_COLS:
            raise SizeGuardError("The design is too large for a dense rank check.")
        amat = self.design_matrix.astype(np.float64)
        normal_mat = (amat.T @ amat).toarray()
        _, rmat, pivots = qr(normal_mat, mode="economic", pivoting=True)
        diag = np.abs(np.diag(rmat))
        if diag.shape[0] == 0 or diag[0] == 0:
            return list(range(self.num_cols))
        rank = int((diag > 1e-10 * diag[0]).sum())
        return sorted(int(c) for c in pivots[rank:])

    def summary(self) -> dict:
        return {"tuples":len(self.tuples), "experiments":self.num_experiments(),
                "rows":self.num_rows, "columns":self.num_cols,
                "time_factor_ns":self.time_factor() * 1e9,
                "shots_ratio":self.shots_ratio()}

    def to_dict(self, include_matrix:bool = True) -> dict:
        output = {"format":"design", "version":constants.FORMAT_VERSION,
                "circuit":self.circuit.to_dict(),
                "tuples":[list(t) for t in self.tuples],
                "shot_weights":self.shot_weights.tolist(),
                "experiments":[[e.to_dict(self.circuit.n) for e in b.experiments]
                    for b in self.blocks]}
        if include_matrix:
            coo = self.design_matrix.tocoo()
            output["design_matrix"] = {"shape":list(coo.shape),
                    "row":coo.row.tolist(), "col":coo.col.tolist(),
                    "data":coo.data.tolist()}
        return output

    @classmethod
    def from_dict(cls, design_dict:dict, circuit:Circuit = None):
        """Rebuilds a design from its JSON dict. The experiments and the
        design matrix are regenerated from the tuples, which is
        deterministic, and checked against the stored matrix if present.

        Raises:
            ValueError: If the document is not a design or the stored
                matrix does not match the regenerated one.
        """
        if design_dict.get("format") != "design":
            raise ValueError("The document does not describe a design.")
        if circuit is None:
            circuit = Circuit.from_dict(design_dict["circuit"])
        design = build_design_matrix(circuit, design_dict["tuples"],
                design_dict["shot_weights"], check_rank=False)
        if "design_matrix" in design_dict:
            stored = design_dict["design_matrix"]
            stored_mat = sparse.csr_matrix((stored["data"],
                (stored["row"], stored["col"])), shape=tuple(stored["shape"]))
            if stored_mat.shape != design.design_matrix.shape or \
                    (stored_mat != design.design_matrix).nnz > 0:
                raise ValueError("The stored design matrix does not match the "
                        "design regenerated from its tuples.")
        return design

    def save(self, filepath:str, include_matrix:bool = True):
        with open(filepath, "w", encoding="utf-8") as fhandle:
            json.dump(self.to_dict(include_matrix), fhandle)

    @classmethod
    def load(cls, filepath:str, circuit:Circuit = None):
        with open(filepath, "r", encoding="utf-8") as fhandle:
            return cls.from_dict(json.load(fhandle), circuit)



def default_shot_weights(durations) -> np.ndarray:
    """Shot weights proportional to 1 / tau_T, so that each tuple is
    measured for the same amount of time."""
    inverse = 1 / np.asarray(durations, dtype=np.float64)
    return inverse / inverse.sum()


def basic_tuple_set(circuit:Circuit) -> list:
    """The basic tuple set: one single-layer tuple per unique layer,
    plus the empty tuple."""
    return [(uid,) for uid in circuit.unique_ids()] + [()]


def basic_time_factor(circuit:Circuit) -> float:
    """The time factor of the basic tuple set under default weights,
    |T_I| / sum_T (1 / tau_T)."""
    durations = [tuple_duration(circuit, t) for t in basic_tuple_set(circuit)]
    return len(durations) / sum(1 / d for d in durations)


def build_design_matrix(circuit:Circuit, tuples, shot_weights = None,
        block_cache:DesignBlockCache = None, check_rank:bool = True) -> ExperimentalDesign:
    """Builds the experimental design for a tuple set.

    Args:
        circuit (Circuit): The circuit.
        tuples: An iterable of tuples of unique layer ids.
        shot_weights: The shot weights. If None, the default weights
            proportional to 1 / tau_T are used.
        block_cache (DesignBlockCache): If supplied, tuple blocks are
            taken from and added to this cache.
        check_rank (bool): If True, and the design is small enough for the
            dense check, rank deficiency is detected and reported with a
            warning. The deficient columns are stored on the design.

    Returns:
        design (ExperimentalDesign): The design.
    """
    if block_cache is None:
        block_cache = DesignBlockCache(circuit)
    elif block_cache.circuit is not circuit:
        raise ValueError("The block cache was built for a different circuit.")
    blocks = [block_cache.get(t) for t in tuples]
    design = ExperimentalDesign(circuit, blocks, shot_weights)
    if check_rank and design.num_cols <= constants.MAX_DENSE_MERIT_COLS:
        design.deficient_columns = design.check_rank()
        if len(design.deficient_columns) > 0:
            warnings.warn(f"The design matrix is rank deficient: "
                    f"{len(design.deficient_columns)} gate eigenvalues cannot "
                    "be identified.")
    return design


def build_basic_design(circuit:Circuit, block_cache:DesignBlockCache = None,
        check_rank:bool = True) -> ExperimentalDesign:
    """The basic design: the basic tuple set with default shot weights."""
    return build_design_matrix(circuit, basic_tuple_set(circuit),
            block_cache = block_cache, check_rank = check_rank)


def check_transfer_compatible(source:Circuit, target:Circuit):
    """Checks that tuples for one circuit are meaningful on another:
    the circuits must come from the same family and have the same
    unique layer structure.

    Raises:
        ValueError: If the circuits are incompatible.
    """
    source_family = source.metadata.get("family")
    target_family = target.metadata.get("family")
    if source_family != target_family:
        raise ValueError(f"Cannot transfer a design from a {source_family} "
                f"circuit to a {target_family} circuit.")
    if source.num_unique != target.num_unique or \
            [l.layer_class for l in source.unique_layers] != \
            [l.layer_class for l in target.unique_layers] or \
            source.unique_index != target.unique_index:
        raise ValueError("The circuits have different unique layer structures.")


def transfer_design(design:ExperimentalDesign, target:Circuit,
        check_rank:bool = False) -> ExperimentalDesign:
    """Rebuilds a design on another circuit of the same family, keeping
    its tuples and shot weights and repacking the experiments.

    Raises:
        ValueError: If the circuits are incompatible.
    """
    check_transfer_compatible(design.circuit, target)
    return build_design_matrix(target, design.tuples, design.shot_weights,
            check_rank = check_rank)


def design_matrix_spectra(design:ExperimentalDesign) -> tuple:
    """The 2-norm condition number of the design matrix and the 2-norm
    of its pseudoinverse, from its singular values.

    Raises:
        SizeGuardError: If the design is too large for a dense SVD.
    """
    if design.num_cols > constants.MAX_DISTRIBUTION_COLS:
        raise SizeGuardError("The design is too large for a dense SVD.")
    singular_values = np.linalg.svd(design.design_matrix.toarray().astype(np.float64),
            compute_uv=False)
    smallest = singular_values[-1]
    if smallest <= 0:
        return float("inf"), float("inf")
    return float(singular_values[0] / smallest), float(1 / smallest)


def reference_design_tuples(circuit:Circuit) -> tuple:
    """Reads the bundled optimised design for the rotated surface code,
    converting its 1-based layer positions to the unique layer ids of
    the circuit and expanding the repeated tuples.

    Returns:
        tuples (list): The tuples.
        shot_weights (np.ndarray): The normalised shot weights.
    """
    data_file = resources.files("acesLab.data").joinpath("rotated_d3_reference_design.json")
    with data_file.open("r", encoding="utf-8") as fhandle:
        reference = json.load(fhandle)
    tuples, weights = [], []
    for entry in reference["tuples"]:
        pattern = tuple(circuit.position_to_unique(p) for p in entry["positions"])
        tuples.append(pattern * entry.get("repetitions", 1))
        weights.append(entry["shot_weight"])
    weights = np.array(weights)
    return tuples, weights / weights.sum()


def load_reference_design(distance:int = 3, circuit_kind:str = "rotated",
        check_rank:bool = False) -> ExperimentalDesign:
    """Builds the bundled reference design, optimised for depolarising
    noise on the distance 3 rotated surface code, at any distance.

    Raises:
        ValueError: If the circuit kind is not "rotated".
    """
    if circuit_kind != "rotated":
        raise ValueError("The reference design is only available for the "
                "rotated surface code.")
    circuit = build_rotated_surface_circuit(distance)
    tuples, weights = reference_design_tuples(circuit)
    return build_design_matrix(circuit, tuples, weights, check_rank = check_rank)
