"""Tests the optimiser hyperparameters, random and repeated tuple
generation, and the shot weight, repetition and tuple set optimisers."""
import os
import sys
import csv
import tempfile
import unittest

import numpy as np

from acesLab.design_toolkit.experimental_design import (build_design_matrix,
        DesignBlockCache)
from acesLab.optimization_toolkit.optimiser_config import OptimiserConfig
from acesLab.optimization_toolkit.shot_weight_optimizer import (optimise_shot_weights,
        optimise_tuple_weights)
from acesLab.optimization_toolkit.tuple_generation import (repeated_tuple_set,
        expand_repeated, zipf_sample, sample_random_tuple, is_mirror_tuple)
from acesLab.optimization_toolkit.repetition_optimizer import (nearest_odd,
        initial_repetition, optimise_repetitions, layer_eigenvalue_summary)
from acesLab.optimization_toolkit.tuple_set_optimizer import (optimise_tuple_set,
        save_history)
from acesLab.circuits.circuit_generators import build_circuit, build_toy_circuit
from acesLab.scoring_toolkit.merit_calcs import merit
from acesLab.scoring_toolkit.toy_model import toy_optimal
from acesLab.exceptions import RankDeficiencyError

sys.path.append(os.path.join(os.path.dirname(os.path.abspath(__file__)), ".."))
from utils.circuit_builders import (build_test_problem, build_two_qubit_circuit,
        RANDOM_STATE)


class TestOptimiserConfig(unittest.TestCase):
    """Checks hyperparameter defaults and validation."""

    def test_defaults(self):
        config = OptimiserConfig()
        self.assertAlmostEqual(config.eta, 10**(3/4))
        self.assertAlmostEqual(config.mu, 0.99)
        self.assertEqual(config.n_ex, 3)
        self.assertIsNone(config.l_set)
        self.assertEqual(config.target_set_size(build_circuit("rotated", 3)), 35)
        self.assertEqual(OptimiserConfig(l_set = 12).target_set_size(
            build_circuit("rotated", 3)), 12)
        self.assertEqual(set(config.to_dict().keys()),
                set(OptimiserConfig(seed = 5).to_dict().keys()))

    def test_invalid_values(self):
        for kwargs in ({"eta":0}, {"eta":-1.0}, {"mu":1.5}, {"eta_r":0},
                {"n_ex":0}, {"l_ex":2.5}, {"l_set":0}, {"rel_tol":-1},
                {"learning_rate":0.1}):
            with self.assertRaises(ValueError):
                OptimiserConfig(**kwargs)


class TestTupleGeneration(unittest.TestCase):
    """Checks the repeated tuple set and random tuples."""

    def test_repeated_tuple_set(self):
        """Multi-qubit layers are interleaved with the DD layer."""
        circuit = build_two_qubit_circuit()
        self.assertEqual(repeated_tuple_set(circuit),
                [(0,), (1, 2, 1, 2), (2,), (3, 2, 3, 2)])
        rotated = repeated_tuple_set(build_circuit("rotated", 3))
        self.assertEqual(len(rotated), 7)
        self.assertIn((1, 4, 1, 4), rotated)
        self.assertIn((4,), rotated)
        unrotated = repeated_tuple_set(build_circuit("unrotated", 3))
        self.assertEqual(unrotated, [(u,) for u in range(5)])
        self.assertEqual(expand_repeated((1, 4), 3), (1, 4, 1, 4, 1, 4))
        with self.assertRaises(ValueError):
            expand_repeated((1,), 0)

    def test_random_tuples(self):
        """Random tuples use valid ids, have bounded length and never
        place two multi-qubit layers next to each other."""
        circuit = build_two_qubit_circuit()
        multi = set(circuit.multi_qubit_ids())
        rng = np.random.default_rng(RANDOM_STATE)
        tuples = [sample_random_tuple(circuit, rng) for _ in range(300)]
        mirrors = 0
        for layer_tuple in tuples:
            self.assertTrue(1 <= len(layer_tuple) <= 2 * circuit.num_layers)
            self.assertTrue(all(0 <= u < circuit.num_unique for u in layer_tuple))
            for first, second in zip(layer_tuple[:-1], layer_tuple[1:]):
                self.assertFalse(first in multi and second in multi)
            mirrors += is_mirror_tuple(layer_tuple)
        self.assertTrue(mirrors > 0)

        rng = np.random.default_rng(RANDOM_STATE)
        again = [sample_random_tuple(circuit, rng) for _ in range(300)]
        self.assertEqual(tuples, again)

    def test_zipf_and_mirror(self):
        rng = np.random.default_rng(RANDOM_STATE)
        draws = [zipf_sample(rng, 1, 10) for _ in range(500)]
        self.assertTrue(min(draws) >= 1 and max(draws) <= 10)
        self.assertTrue(draws.count(1) > draws.count(10))
        self.assertEqual(zipf_sample(rng, np.inf, 10), 1)
        with self.assertRaises(ValueError):
            zipf_sample(rng, 1, 0)
        self.assertTrue(is_mirror_tuple((1, 2, 2, 1, 3)))
        self.assertTrue(is_mirror_tuple((1, 1, 0)))
        self.assertFalse(is_mirror_tuple((1, 2, 1, 2, 3)))
        self.assertFalse(is_mirror_tuple((1, 2)))


class TestShotWeightOptimiser(unittest.TestCase):
    """Checks shot weight descent."""

    def test_improves_merit(self):
        """Optimised weights are normalised and never worse than the
        starting weights."""
        circuit, noise, basic = build_test_problem("small", "lognormal")
        design = build_design_matrix(circuit, basic.tuples + [(1, 2, 1, 2) * 5])
        config = OptimiserConfig()
        for estimator_kind in ("OLS", "WLS", "GLS"):
            start = merit(design, noise, estimator_kind).merit
            weights, best, history = optimise_shot_weights(design, noise, config,
                    estimator_kind, max_steps = 40)
            self.assertAlmostEqual(weights.sum(), 1.0)
            self.assertTrue(np.all(weights > 0))
            self.assertTrue(best <= start)
            self.assertAlmostEqual(best, merit(design.with_shot_weights(weights),
                noise, estimator_kind).merit)
            self.assertEqual(history[0]["action"], "start")
            merits = [entry["merit"] for entry in history]
            self.assertTrue(all(b <= a for a, b in zip(merits[:-1], merits[1:])))

    def test_rank_deficient(self):
        circuit, noise, _ = build_test_problem("small")
        design = build_design_matrix(circuit, [(), (0,)], check_rank = False)
        with self.assertRaises(RankDeficiencyError):
            optimise_shot_weights(design, noise)
        score, weight_map = optimise_tuple_weights(circuit, noise, [(), (0,)])
        self.assertTrue(np.isinf(score))
        self.assertEqual(set(weight_map.keys()), {(), (0,)})

    def test_warm_start(self):
        """Tuples missing from the weight map start at the mean weight."""
        circuit, noise, basic = build_test_problem("small")
        cache = DesignBlockCache(circuit)
        score, weight_map = optimise_tuple_weights(circuit, noise, basic.tuples,
                block_cache = cache, max_steps = 10)
        self.assertTrue(np.isfinite(score))
        tuples = basic.tuples + [(0, 1, 0)]
        new_score, new_map = optimise_tuple_weights(circuit, noise, tuples,
                weight_map, block_cache = cache, max_steps = 10)
        self.assertTrue(np.isfinite(new_score))
        self.assertEqual(list(new_map.keys()), tuples)
        self.assertAlmostEqual(sum(new_map.values()), 1.0)


class TestRepetitionOptimiser(unittest.TestCase):
    """Checks the repetition number optimiser."""

    def test_nearest_odd(self):
        self.assertEqual(nearest_odd(1.0), 1)
        self.assertEqual(nearest_odd(4.2), 5)
        self.assertEqual(nearest_odd(6.9), 7)
        self.assertEqual(nearest_odd(10.0), 9)

    def test_initial_repetition(self):
        """The toy model optimum sets the starting repetition number."""
        circuit = build_toy_circuit(1, tau = 20.0)
        layer_min = np.array([0.999])
        start = initial_repetition(circuit, (0,), layer_min, 0.96)
        phi_opt, _, _ = toy_optimal(0.999, 0.96, 20.0)
        self.assertEqual(start % 2, 1)
        self.assertTrue(abs(start - phi_opt) <= 1)
        self.assertEqual(initial_repetition(circuit, (0,), layer_min, 0.96,
            max_repetition = 10), 9)

    def test_layer_summary(self):
        circuit, noise, _ = build_test_problem("small")
        layer_min, lam_m = layer_eigenvalue_summary(circuit, noise)
        self.assertAlmostEqual(lam_m, 0.96)
        self.assertAlmostEqual(layer_min[1], 1 - 16 * 0.01 / 15)
        self.assertAlmostEqual(layer_min[0], 1 - 4 * 0.001 / 3)

    def test_optimise_repetitions(self):
        """Coordinate descent keeps odd repetitions and never ends worse
        than it starts."""
        circuit, noise, _ = build_test_problem("small", "lognormal")
        config = OptimiserConfig(trial_max_steps = 5, max_repetition = 41)
        reps, tuples, weight_map, best, history = optimise_repetitions(circuit,
                noise, config, "GLS", initial_repetitions = [3, 3, 3, 3])
        self.assertEqual(len(reps), 4)
        self.assertTrue(all(r % 2 == 1 and 1 <= r <= 41 for r in reps))
        self.assertTrue(best <= history[0]["merit"])
        self.assertEqual(tuples[:5], [(0,), (1,), (2,), (3,), ()])
        self.assertEqual(set(weight_map.keys()), set(tuples))
        with self.assertRaises(ValueError):
            optimise_repetitions(circuit, noise, config, initial_repetitions = [2, 3, 3, 3])


class TestTupleSetOptimiser(unittest.TestCase):
    """Checks excursions of the tuple set optimiser."""

    def test_short_run(self):
        """A short run from the basic tuple set never ends worse than the
        basic design."""
        circuit, noise, basic = build_test_problem("small", "lognormal")
        config = OptimiserConfig(n_ex = 1, l_ex = 2, l_set = 6, f_trial = 2,
                trial_max_steps = 5, max_steps = 20, seed = RANDOM_STATE)
        basic_merit = merit(basic, noise, "GLS").merit
        design, best, history = optimise_tuple_set(circuit, noise, config, "GLS",
                initial_tuples = basic.tuples)
        self.assertTrue(best <= basic_merit * (1 + 1e-9))
        self.assertAlmostEqual(best, merit(design, noise, "GLS").merit)
        self.assertEqual(history[0]["stage"], "initial")
        self.assertEqual(history[-1]["stage"], "final")
        self.assertEqual(len(set(design.tuples)), len(design.tuples))

        with tempfile.TemporaryDirectory() as tmp_dir:
            filepath = os.path.join(tmp_dir, "history", "history.csv")
            save_history(history, filepath)
            with open(filepath, "r", encoding="utf-8") as fhandle:
                rows = list(csv.DictReader(fhandle))
        self.assertEqual(len(rows), len(history))
        self.assertEqual(rows[-1]["action"], "optimise_weights")

    def test_rank_deficient_start(self):
        circuit, noise, _ = build_test_problem("small")
        with self.assertRaises(RankDeficiencyError):
            optimise_tuple_set(circuit, noise, OptimiserConfig(n_ex = 1),
                    initial_tuples = [(), (0,)])


if __name__ == "__main__":
    unittest.main()
