"""Tests Pauli propagation, experiment packing and the construction,
transfer and serialisation of experimental designs."""
import os
import sys
import tempfile
import unittest
from itertools import combinations

import numpy as np

from acesLab.circuits.circuit_generators import build_circuit, build_toy_circuit
from acesLab.design_toolkit.propagation import propagate, propagate_pauli
from acesLab.design_toolkit.experiment_packing import (pauli_preparation_set,
        pack_experiments, t_consistent)
from acesLab.design_toolkit.experimental_design import (ExperimentalDesign,
        build_design_matrix, transfer_design,
        load_reference_design, design_matrix_spectra, default_shot_weights,
        DesignBlockCache)
from acesLab.design_toolkit.covariance_model import CovarianceModel, circuit_eigenvalues
from acesLab.pauli_toolkit.pauli_strings import PauliString, local_index

sys.path.append(os.path.join(os.path.dirname(os.path.abspath(__file__)), ".."))
from utils.circuit_builders import (build_two_qubit_circuit, build_test_problem,
        build_three_layer_circuit)
from utils.propagation_oracle import brute_force_propagation


#Tuples for the small test circuit, including periodic tuples whose
#propagation takes the shortcut.
SMALL_TUPLES = [(0,), (1,), (3,), (0, 1, 2, 3, 0), (1, 2, 1, 2),
        (1, 2) * 7, (3,) * 5, (0, 1, 0, 1, 0), (2, 3, 1)]


class TestPropagation(unittest.TestCase):
    """Checks propagation against the brute force oracle."""

    def test_against_oracle(self):
        """Final Pauli, sign and gate eigenvalue counts all match."""
        circuit = build_two_qubit_circuit()
        for layer_tuple in SMALL_TUPLES:
            for pauli in pauli_preparation_set(circuit, layer_tuple):
                result = propagate_pauli(circuit, layer_tuple, pauli)
                final, counts = brute_force_propagation(circuit, layer_tuple, pauli)
                self.assertEqual(result.final_codes, final.sparse())
                self.assertEqual(result.sign, final.sign())
                self.assertEqual(result.gate_counts, counts)

    def test_empty_tuple(self):
        """The empty tuple leaves the Pauli unchanged."""
        circuit = build_two_qubit_circuit()
        result = propagate(circuit, (), {0:2, 2:1})
        self.assertEqual(result.final_codes, {0:2, 2:1})
        self.assertEqual(result.gate_counts, {})
        self.assertEqual(result.spam_keys(), [("meas", 0, "X"), ("meas", 2, "Z")])

    def test_involution(self):
        """Two rounds of a CZ layer and the DD layer return every Pauli
        to itself, so repeating the pattern multiplies its counts."""
        circuit = build_circuit("rotated", 3)
        pattern = (1, 4, 1, 4)
        for pauli in pauli_preparation_set(circuit, pattern)[:60]:
            once = propagate_pauli(circuit, pattern, pauli)
            self.assertEqual(once.final_codes, pauli.sparse())
            many = propagate_pauli(circuit, pattern * 25, pauli)
            self.assertEqual(many.final_codes, pauli.sparse())
            self.assertEqual(many.gate_counts,
                    {k:25 * v for k, v in once.gate_counts.items()})


class TestExperimentPacking(unittest.TestCase):
    """Checks the preparation sets and experiment sets."""

    def test_preparation_sets(self):
        """The empty tuple prepares the 3n single-qubit Paulis; a layer
        prepares every Pauli supported on one of its gates."""
        circuit = build_two_qubit_circuit()
        self.assertEqual(len(pauli_preparation_set(circuit, ())), 9)
        self.assertEqual(len(pauli_preparation_set(circuit, (1,))), 18)
        self.assertEqual(len(pauli_preparation_set(circuit, (1, 3))), 27)

    def test_experiments_are_consistent(self):
        """Every Pauli is in at least one experiment, members of one
        experiment are mutually consistent, and the combined preparation
        and measurement agree with every member."""
        circuit = build_two_qubit_circuit()
        for layer_tuple in SMALL_TUPLES + [()]:
            paulis = pauli_preparation_set(circuit, layer_tuple)
            experiments = pack_experiments(circuit, layer_tuple, paulis)
            covered = set()
            for experiment in experiments:
                covered.update(experiment.members)
                for first, second in combinations(experiment.members, 2):
                    self.assertTrue(t_consistent(paulis[first], paulis[second],
                        circuit, layer_tuple))
                for member in experiment.members:
                    prep = paulis[member].sparse()
                    meas = propagate(circuit, layer_tuple, prep).final_codes
                    self.assertTrue(all(experiment.prep[q] == c for q, c in prep.items()))
                    self.assertTrue(all(experiment.meas[q] == c for q, c in meas.items()))
            self.assertEqual(covered, set(range(len(paulis))))

    def test_empty_tuple_packing(self):
        """The single-qubit Paulis pack into the all-X, all-Y and all-Z
        experiments."""
        circuit = build_circuit("rotated", 3)
        experiments = pack_experiments(circuit, ())
        self.assertEqual(len(experiments), 3)
        for experiment in experiments:
            self.assertEqual(len(set(experiment.prep.values())), 1)
            self.assertEqual(len(experiment.prep), circuit.n)

    def test_t_consistent(self):
        """Paulis clashing on a prepared qubit are inconsistent."""
        circuit = build_toy_circuit(2)
        x_first = PauliString.from_label("XI")
        z_first = PauliString.from_label("ZI")
        x_second = PauliString.from_label("IX")
        self.assertFalse(t_consistent(x_first, z_first, circuit, (0,)))
        self.assertTrue(t_consistent(x_first, x_second, circuit, (0,)))


class TestExperimentalDesign(unittest.TestCase):
    """Checks design construction, transfer and serialisation."""

    def test_basic_design(self):
        """The basic design has one row per gate eigenvalue and full rank."""
        circuit, _, design = build_test_problem("rotated")
        self.assertEqual(design.num_rows, 624)
        self.assertEqual(design.num_cols, 624)
        self.assertEqual(design.check_rank(), [])
        self.assertEqual(design.deficient_columns, [])
        self.assertEqual(design.tuples[-1], ())
        self.assertEqual(design.blocks[-1].num_experiments, 3)
        self.assertTrue(np.all(design.row_counts >= 1))
        self.assertAlmostEqual(design.shots_ratio(), 1.0)
        self.assertAlmostEqual(design.shot_weights.sum(), 1.0)
        self.assertTrue(np.allclose(design.shot_weights,
            default_shot_weights(design.durations)))
        self.assertEqual(len(design.tuples), circuit.num_unique + 1)

    def test_hand_worked_row(self):
        """The row of ZXI under the tuple (2, 1, 3, 2), in 1-based layer
        numbers, picks up six gate eigenvalues once each, plus the
        measurement eigenvalues of the final Z, Y and Z bases."""
        circuit = build_three_layer_circuit()
        layer_tuple = (1, 0, 2, 1)
        self.assertIn(PauliString.from_label("ZXI"),
                pauli_preparation_set(circuit, layer_tuple))
        design = build_design_matrix(circuit, [layer_tuple], check_rank = False)
        row = design.row_index(0, PauliString.from_label("ZXI"))
        entries = design.design_matrix[row:row + 1].tocoo()
        found = {design.col_keys[c]:int(v) for c, v in zip(entries.col, entries.data)}

        def gate_key(uid, qubit, codes):
            return (uid, circuit.gate_map(uid)[qubit], local_index(codes))

        expected = [gate_key(1, 0, [1, 2]), gate_key(0, 1, [2, 0]),
                gate_key(2, 1, [2]), gate_key(2, 2, [1]),
                gate_key(1, 0, [0, 3]), gate_key(1, 2, [2]),
                ("meas", 0, "Z"), ("meas", 1, "Y"), ("meas", 2, "Z")]
        self.assertEqual(found, {key:1 for key in expected})
        final = propagate_pauli(circuit, layer_tuple, PauliString.from_label("ZXI"))
        self.assertEqual(PauliString.from_sparse(3, final.final_codes).label()[1:],
                "ZYZ")

    def test_rank_deficient_design(self):
        """A design that only measures SPAM cannot identify the gates."""
        circuit = build_two_qubit_circuit()
        with self.assertWarns(UserWarning):
            design = build_design_matrix(circuit, [()])
        self.assertEqual(len(design.deficient_columns), circuit.gate_eigenvalue_count() - 9)

    def test_invalid_designs(self):
        """Duplicate tuples, empty sets and bad weights are rejected."""
        circuit = build_two_qubit_circuit()
        with self.assertRaises(ValueError):
            build_design_matrix(circuit, [(0,), (0,)], check_rank = False)
        with self.assertRaises(ValueError):
            build_design_matrix(circuit, [], check_rank = False)
        with self.assertRaises(ValueError):
            build_design_matrix(circuit, [(0,), ()], [1.0, -1.0], check_rank = False)
        with self.assertRaises(ValueError):
            build_design_matrix(circuit, [(0,), ()], [1.0], check_rank = False)
        with self.assertRaises(ValueError):
            build_design_matrix(circuit, [(7,)], check_rank = False)

    def test_block_cache(self):
        """Designs sharing a cache reuse their tuple blocks."""
        circuit = build_two_qubit_circuit()
        cache = DesignBlockCache(circuit)
        first = build_design_matrix(circuit, [(0,), (1,), ()], block_cache = cache,
                check_rank = False)
        second = build_design_matrix(circuit, [(1,), (2,), ()], block_cache = cache,
                check_rank = False)
        self.assertIs(first.blocks[1], second.blocks[0])
        self.assertEqual(len(cache), 4)
        with self.assertRaises(ValueError):
            build_design_matrix(build_toy_circuit(1), [()], block_cache = cache)

    def test_shot_allocation(self):
        """Rounded experiment budgets plus lost shots give the budget."""
        _, _, design = build_test_problem("small")
        allocation = design.shot_allocation(10**5)
        used = (allocation["per_experiment"] * design.experiment_counts()).sum()
        self.assertAlmostEqual(used + allocation["lost"], 10**5)
        self.assertTrue(0 <= allocation["lost"] < design.num_experiments())
        self.assertAlmostEqual(allocation["S_prime"], 10**5 * design.shots_ratio())
        with self.assertRaises(ValueError):
            design.shot_allocation(0)

    def test_row_index(self):
        """Rows are found from the tuple and the prepared Pauli."""
        _, _, design = build_test_problem("small")
        row = design.row_index(len(design.tuples) - 1, PauliString.from_label("IXI"))
        block = design.blocks[-1]
        self.assertEqual(block.paulis[row - design.row_offsets[-2]].label(), "+IXI")
        with self.assertRaises(KeyError):
            design.row_index(0, PauliString.from_label("XXX"))

    def test_transfer(self):
        """Transfer keeps tuples and weights and rebuilds the matrix."""
        _, _, design = build_test_problem("rotated")
        design = design.with_shot_weights(np.arange(1, len(design.tuples) + 1))
        target = build_circuit("rotated", 5)
        transferred = transfer_design(design, target)
        self.assertEqual(transferred.tuples, design.tuples)
        self.assertTrue(np.allclose(transferred.shot_weights, design.shot_weights))
        self.assertEqual(transferred.num_cols, 1896)
        self.assertEqual(transferred.num_rows, 1896)
        with self.assertRaises(ValueError):
            transfer_design(design, build_circuit("unrotated", 3))

    def test_reference_design(self):
        """The bundled design has 31 tuples, including long repeated ones,
        and 261 experiments at any distance."""
        design = load_reference_design(3)
        self.assertEqual(len(design.tuples), 31)
        self.assertIn((4,) * 191, design.tuples)
        self.assertIn((1, 4, 1, 4) * 25, design.tuples)
        self.assertAlmostEqual(design.shot_weights.sum(), 1.0)
        self.assertEqual(design.circuit.n, 17)
        self.assertEqual(design.num_experiments(), 261)
        larger = load_reference_design(5)
        self.assertEqual(larger.tuples, design.tuples)
        self.assertEqual(larger.num_experiments(), 261)
        with self.assertRaises(ValueError):
            load_reference_design(3, "unrotated")

    def test_spectra(self):
        """The condition number and pseudoinverse norm of the distance 3
        basic design are about 29.39 and 5.4211."""
        _, _, design = build_test_problem("rotated")
        condition, pinv_norm = design_matrix_spectra(design)
        self.assertTrue(abs(condition / 29.39 - 1) < 0.02)
        self.assertTrue(abs(pinv_norm / 5.4211 - 1) < 0.02)
        _, _, small = build_test_problem("small")
        condition, pinv_norm = design_matrix_spectra(small)
        self.assertTrue(np.isfinite(condition) and condition >= 1)
        self.assertTrue(pinv_norm > 0)

    def test_save_and_load(self):
        """Designs are regenerated from their tuples on loading, and the
        stored matrix is checked."""
        circuit, _, design = build_test_problem("small")
        design = build_design_matrix(circuit, SMALL_TUPLES + [()], check_rank = False)
        with tempfile.TemporaryDirectory() as tmp_dir:
            filepath = os.path.join(tmp_dir, "design.json")
            design.save(filepath)
            reloaded = ExperimentalDesign.load(filepath, circuit)
        self.assertEqual(reloaded.tuples, design.tuples)
        self.assertTrue(np.allclose(reloaded.shot_weights, design.shot_weights))
        self.assertEqual((reloaded.design_matrix != design.design_matrix).nnz, 0)

        tampered = design.to_dict()
        tampered["design_matrix"]["data"][0] += 1
        with self.assertRaises(ValueError):
            ExperimentalDesign.from_dict(tampered, circuit)


class TestCovarianceModel(unittest.TestCase):
    """Checks the circuit eigenvalue covariance model."""

    def test_diagonal_and_scaling(self):
        """Diagonal entries follow (1 - Lambda^2) / (S_T E_a) and every
        block scales as 1 / S."""
        _, noise, design = build_test_problem("small")
        cov_model = CovarianceModel(design, noise)
        lam = circuit_eigenvalues(design, noise.gate_eigenvalues())
        self.assertTrue(np.allclose(lam, cov_model.circuit_eigenvalues))

        omega = cov_model.omega(measurement_budget = 1000.0)
        per_row_budget = 1000.0 * design.shot_weights[design.row_tuple] / \
                design.experiment_counts()[design.row_tuple]
        expected = (1 - lam**2) / (per_row_budget * design.row_counts)
        self.assertTrue(np.allclose(omega.diagonal(), expected))
        self.assertTrue(np.allclose(cov_model.omega(measurement_budget = 10.0).toarray(),
            100 * omega.toarray()))
        self.assertTrue(np.allclose(cov_model.omega_prime_diagonal(),
            cov_model.omega().diagonal() / lam**2))
        dense = omega.toarray()
        self.assertTrue(np.allclose(dense, dense.T))
        self.assertTrue(np.all(np.linalg.eigvalsh(dense) > 0))


if __name__ == "__main__":
    unittest.main()
