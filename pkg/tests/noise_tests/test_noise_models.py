"""Tests the Walsh-Hadamard transforms, the simplex projection and the
depolarising and log-normal noise model generators."""
import os
import sys
import tempfile
import unittest

import numpy as np

from acesLab.noise_toolkit.walsh_hadamard import (wht_forward, wht_inverse,
        project_simplex, marginalise, tvd, depolarising_constant,
        fast_hadamard_transform)
from acesLab.noise_toolkit.noise_model import (NoiseModel, GateChannel,
        gate_eigenvalue_keys)
from acesLab.noise_toolkit.noise_generators import (depolarising_model,
        lognormal_model, build_noise_model)
from acesLab.pauli_toolkit.pauli_strings import local_index, local_symplectic_matrix
from acesLab.circuits.circuit_generators import build_circuit
from acesLab.circuits.circuit_classes import Layer, Circuit
from acesLab.pauli_toolkit.clifford_gates import CliffordGate

sys.path.append(os.path.join(os.path.dirname(os.path.abspath(__file__)), ".."))
from utils.circuit_builders import build_two_qubit_circuit, RANDOM_STATE


class TestWalshHadamard(unittest.TestCase):
    """Checks the transforms between probabilities and eigenvalues."""

    def test_against_symplectic_matrix(self):
        """The fast transform matches the brute force sum
        lambda_b = sum_a (-1)^omega(a, b) p_a."""
        rng = np.random.default_rng(RANDOM_STATE)
        for nqubits in (1, 2):
            probs = rng.uniform(size=4**nqubits)
            probs /= probs.sum()
            signs = 1 - 2 * local_symplectic_matrix(nqubits)
            self.assertTrue(np.allclose(wht_forward(probs), signs.T @ probs))

    def test_identity_channel(self):
        """The noiseless channel has every eigenvalue equal to 1."""
        delta = np.zeros(16)
        delta[0] = 1
        self.assertTrue(np.allclose(wht_forward(delta), 1))

    def test_inverse(self):
        """The inverse transform undoes the forward transform."""
        rng = np.random.default_rng(RANDOM_STATE)
        probs = rng.uniform(size=(5, 16))
        probs /= probs.sum(axis=1)[:,None]
        self.assertTrue(np.allclose(wht_inverse(wht_forward(probs)), probs))

    def test_hadamard_shape_checks(self):
        """Invalid lengths and distributions are rejected."""
        with self.assertRaises(ValueError):
            fast_hadamard_transform(np.ones(6))
        with self.assertRaises(ValueError):
            wht_forward(np.ones(8) / 8)
        with self.assertRaises(ValueError):
            wht_forward(np.array([0.5, 0.5, 0.5, -0.5]))
        with self.assertRaises(ValueError):
            wht_forward(np.array([0.5, 0.1, 0.1, 0.1]))

    def test_depolarising_eigenvalues(self):
        """A depolarising channel with infidelity r has every non-identity
        eigenvalue equal to 1 minus its depolarising constant."""
        for nqubits, rate in ((1, 0.003), (2, 0.01)):
            size = 4**nqubits
            probs = np.full(size, rate / (size - 1))
            probs[0] = 1 - rate
            eigs = wht_forward(probs)
            self.assertTrue(np.allclose(eigs[1:],
                1 - depolarising_constant(rate, nqubits)))
        self.assertAlmostEqual(depolarising_constant(0.003, 1), 0.004)


class TestDistributionTools(unittest.TestCase):
    """Checks the simplex projection, marginalisation and TVD."""

    def test_project_simplex(self):
        """Known projections, and points on the simplex are left alone."""
        self.assertTrue(np.allclose(project_simplex([2.0, 0.0]), [1, 0]))
        self.assertTrue(np.allclose(project_simplex([5.0, 5.0, 5.0]), [1/3, 1/3, 1/3]))
        self.assertTrue(np.allclose(project_simplex([0.6, -0.2, 0.6]), [0.5, 0, 0.5]))
        point = np.array([0.7, 0.2, 0.1])
        self.assertTrue(np.allclose(project_simplex(point), point))
        with self.assertRaises(ValueError):
            project_simplex([])
        with self.assertRaises(ValueError):
            project_simplex([np.nan, 1.0])

    def test_marginalise_product(self):
        """Marginals of a product distribution are its factors."""
        first = np.array([0.9, 0.05, 0.03, 0.02])
        second = np.array([0.8, 0.1, 0.06, 0.04])
        joint = np.zeros(16)
        for c_1 in range(4):
            for c_2 in range(4):
                joint[local_index([c_1, c_2])] = first[c_1] * second[c_2]
        self.assertTrue(np.allclose(marginalise(joint, [0]), first))
        self.assertTrue(np.allclose(marginalise(joint, [1]), second))
        swapped = np.zeros(16)
        for c_1 in range(4):
            for c_2 in range(4):
                swapped[local_index([c_2, c_1])] = first[c_1] * second[c_2]
        self.assertTrue(np.allclose(marginalise(joint, [1, 0]), swapped))
        with self.assertRaises(ValueError):
            marginalise(joint, [2])

    def test_tvd(self):
        self.assertAlmostEqual(tvd([1, 0], [0, 1]), 1.0)
        self.assertAlmostEqual(tvd([0.5, 0.5], [0.5, 0.5]), 0.0)
        with self.assertRaises(ValueError):
            tvd([1, 0], [1, 0, 0])


class TestNoiseModels(unittest.TestCase):
    """Checks the noise model generators and serialisation."""

    def test_depolarising_model(self):
        """Eigenvalues are 1 - 4 r1 / 3, 1 - 16 r2 / 15 and 1 - 2 rm."""
        circuit = build_two_qubit_circuit()
        noise = depolarising_model(circuit, 0.003, 0.015, 0.02)
        eigs = noise.gate_eigenvalues()
        keys = gate_eigenvalue_keys(circuit)
        self.assertEqual(eigs.shape[0], circuit.gate_eigenvalue_count())
        for key, value in zip(keys, eigs):
            if key[0] == "meas":
                self.assertAlmostEqual(value, 0.96)
            elif circuit.unique_layers[key[0]].gates[key[1]].arity == 2:
                self.assertAlmostEqual(value, 1 - 16 * 0.015 / 15)
            else:
                self.assertAlmostEqual(value, 1 - 4 * 0.003 / 3)
        self.assertAlmostEqual(noise.channel((1, 0)).infidelity(), 0.015)

    def test_lognormal_model(self):
        """Log-normal models are fixed by their seed, and the mean gate
        infidelity is close to its target on a large circuit."""
        circuit = build_circuit("rotated", 5)
        first = lognormal_model(circuit, seed = RANDOM_STATE)
        second = lognormal_model(circuit, seed = RANDOM_STATE)
        third = lognormal_model(circuit, seed = RANDOM_STATE + 1)
        self.assertTrue(np.array_equal(first.gate_eigenvalues(), second.gate_eigenvalues()))
        self.assertFalse(np.array_equal(first.gate_eigenvalues(), third.gate_eigenvalues()))

        two_qubit = [c.infidelity() for gate_id, c in first.channels.items()
                if gate_id[0] != "meas" and c.nqubits == 2]
        single = [c.infidelity() for gate_id, c in first.channels.items()
                if gate_id[0] != "meas" and c.nqubits == 1]
        self.assertTrue(abs(np.mean(two_qubit) / 0.005 - 1) < 0.15)
        self.assertTrue(abs(np.mean(single) / 0.00075 - 1) < 0.15)
        self.assertTrue(np.all(first.gate_eigenvalues() > 0))
        self.assertTrue(np.all(first.gate_eigenvalues() <= 1))

    def test_lognormal_channels_are_independent(self):
        """Appending a new layer leaves the sampled channels of the
        existing gates and measurements unchanged."""
        circuit = build_two_qubit_circuit()
        phase_layer = Layer([CliffordGate("S", [q]) for q in range(3)], 29e-9)
        extended = Circuit(3, list(circuit.layers) + [phase_layer],
                circuit.meas_reset_time, True)
        self.assertEqual(extended.num_unique, circuit.num_unique + 1)
        noise = lognormal_model(circuit, seed = RANDOM_STATE)
        extended_noise = lognormal_model(extended, seed = RANDOM_STATE)
        for gate_id, channel in noise.channels.items():
            self.assertTrue(np.array_equal(channel.probabilities,
                extended_noise.channel(gate_id).probabilities), gate_id)
        self.assertFalse(np.array_equal(noise.channel((0, 0)).probabilities,
            noise.channel((0, 1)).probabilities))

    def test_build_noise_model(self):
        """Names and parameter overrides."""
        circuit = build_two_qubit_circuit()
        noise = build_noise_model(circuit, "depolarising", {"rm":0.01})
        self.assertEqual(noise.params["rm"], 0.01)
        self.assertEqual(noise.generator, "depolarising")
        with self.assertRaises(ValueError):
            build_noise_model(circuit, "amplitude_damping")
        with self.assertRaises(ValueError):
            build_noise_model(circuit, "depolarising", {"r3":0.01})
        with self.assertRaises(ValueError):
            depolarising_model(circuit, 1.5, 0.01, 0.01)

    def test_missing_channel(self):
        """A model must cover every gate and measurement."""
        circuit = build_two_qubit_circuit()
        channels = dict(depolarising_model(circuit).channels)
        del channels[(0, 0)]
        with self.assertRaises(ValueError):
            NoiseModel(circuit, channels)
        with self.assertRaises(ValueError):
            GateChannel(("meas", 0, "X"), "Meas", [0.5, 0.4])

    def test_save_and_load(self):
        """A saved model is rebuilt with identical eigenvalues."""
        circuit = build_two_qubit_circuit()
        noise = lognormal_model(circuit, seed = RANDOM_STATE)
        with tempfile.TemporaryDirectory() as tmp_dir:
            filepath = os.path.join(tmp_dir, "noise.json")
            noise.save(filepath)
            reloaded = NoiseModel.load(circuit, filepath)
        self.assertTrue(np.allclose(reloaded.gate_eigenvalues(), noise.gate_eigenvalues()))
        self.assertEqual(reloaded.seed, RANDOM_STATE)
        with self.assertRaises(ValueError):
            NoiseModel.from_dict(build_circuit("rotated", 3), noise.to_dict())


if __name__ == "__main__":
    unittest.main()
