"""Tests circuit eigenvalue estimation, the OLS / WLS / FGLS gate
eigenvalue fits and the recovery of Pauli error probabilities."""
import os
import sys
import csv
import json
import tempfile
import unittest

import numpy as np

from acesLab.fitting_toolkit.eigenvalue_estimation import (CircuitEigenvalueEstimates,
        estimate_circuit_eigenvalues)
from acesLab.fitting_toolkit.least_squares_fitting import fit_gate_eigenvalues
from acesLab.fitting_toolkit.noise_recovery import (recover_probabilities,
        estimated_noise_model, circuit_eigenvalue_residuals, save_residuals,
        EstimationReport, report_metrics)
from acesLab.design_toolkit.covariance_model import circuit_eigenvalues
from acesLab.design_toolkit.experimental_design import build_design_matrix
from acesLab.simulation_toolkit.frame_simulator import simulate_design
from acesLab.simulation_toolkit.outcome_dataset import OutcomeDataset
from acesLab.scoring_toolkit.merit_calcs import merit
from acesLab.exceptions import RankDeficiencyError

sys.path.append(os.path.join(os.path.dirname(os.path.abspath(__file__)), ".."))
from utils.circuit_builders import build_test_problem, RANDOM_STATE


def exact_estimates(design, noise, shots_per_experiment = 10**6):
    """Estimates equal to the true circuit eigenvalues."""
    truth = circuit_eigenvalues(design, noise.gate_eigenvalues())
    return CircuitEigenvalueEstimates(truth, design.row_counts * shots_per_experiment)


class TestCircuitEigenvalueEstimates(unittest.TestCase):
    """Checks estimates, variances and clipping."""

    def test_estimates(self):
        dataset = OutcomeDataset([3, 0, 10, 4], [4, 0, 10, 10], [4, 10, 10], [0, 3])
        estimates = estimate_circuit_eigenvalues(dataset)
        self.assertAlmostEqual(estimates.estimates[0], 0.5)
        self.assertTrue(np.isnan(estimates.estimates[1]))
        self.assertEqual(estimates.valid.tolist(), [True, False, True, True])
        #1 - estimate^2 is floored at 1 / shots.
        self.assertAlmostEqual(estimates.variances[2], 0.01)
        self.assertAlmostEqual(estimates.variances[0], 0.75 / 4)

        clipped, was_clipped = estimates.clipped()
        self.assertAlmostEqual(clipped[3], 0.05)
        self.assertEqual(was_clipped.tolist(), [False, False, False, True])
        self.assertTrue(np.isnan(clipped[1]))

    def test_design_mismatch(self):
        _, noise, design = build_test_problem("small")
        _, _, rotated = build_test_problem("rotated")
        dataset = simulate_design(design, noise, 1000, RANDOM_STATE)
        with self.assertRaises(ValueError):
            estimate_circuit_eigenvalues(dataset, rotated)



class TestLeastSquaresFit(unittest.TestCase):
    """Checks the gate eigenvalue fits."""

    def setUp(self):
        self.circuit, self.noise, basic = build_test_problem("small", "lognormal")
        self.design = build_design_matrix(self.circuit, basic.tuples +
                [(1, 2, 1, 2) * 5, (3, 2, 3, 2) * 3, (0, 1, 0)])

    def test_exact_data(self):
        """Every method recovers the gate eigenvalues from exact data."""
        estimates = exact_estimates(self.design, self.noise)
        for method in ("OLS", "WLS", "FGLS"):
            fit = fit_gate_eigenvalues(self.design, estimates, method)
            self.assertEqual(fit.method_used, method)
            self.assertTrue(np.allclose(fit.gate_eigenvalues,
                self.noise.gate_eigenvalues(), atol=1e-8))
            self.assertEqual(fit.diagnostics["rows_excluded"], 0)
        self.assertTrue(fit.diagnostics["converged"])
        self.assertTrue(fit.diagnostics["iterations"] >= 1)
        self.assertEqual(set(fit.to_dict().keys()), {"method", "method_used",
            "log_eigenvalues", "gate_eigenvalues", "diagnostics"})

    def test_simulated_data(self):
        """Fits of simulated data land within a few multiples of the
        predicted error, and every estimate lies in (0, 1]."""
        dataset = simulate_design(self.design, self.noise, 1e6, RANDOM_STATE)
        estimates = estimate_circuit_eigenvalues(dataset, self.design)
        s_prime = dataset.metadata["S_prime"]
        for method, kind in (("OLS", "OLS"), ("WLS", "WLS"), ("FGLS", "GLS")):
            fit = fit_gate_eigenvalues(self.design, estimates, method)
            self.assertTrue(np.all(fit.gate_eigenvalues > 0))
            self.assertTrue(np.all(fit.gate_eigenvalues <= 1))
            distributions = recover_probabilities(self.circuit, fit.gate_eigenvalues)
            metrics = report_metrics(self.circuit, fit.gate_eigenvalues,
                    distributions, self.noise, s_prime)
            predicted = merit(self.design, self.noise, kind).merit
            self.assertTrue(0 < metrics["nrmse"] < 2 * predicted, method)

    def test_excluded_rows(self):
        """Rows without shots are left out and counted."""
        estimates = exact_estimates(self.design, self.noise)
        values, shots = estimates.estimates.copy(), estimates.row_shots.copy()
        last = self.design.row_offsets[-2]
        values[last], shots[last] = np.nan, 0
        fit = fit_gate_eigenvalues(self.design, CircuitEigenvalueEstimates(values,
            shots), "WLS")
        self.assertEqual(fit.diagnostics["rows_excluded"], 1)
        self.assertTrue(np.allclose(fit.gate_eigenvalues,
            self.noise.gate_eigenvalues(), atol=1e-8))

    def test_invalid_fits(self):
        estimates = exact_estimates(self.design, self.noise)
        with self.assertRaises(ValueError):
            fit_gate_eigenvalues(self.design, estimates, "GLS")
        deficient = build_design_matrix(self.circuit, [(), (0,)], check_rank = False)
        with self.assertRaises(ValueError):
            fit_gate_eigenvalues(deficient, estimates)
        with self.assertRaises(RankDeficiencyError):
            fit_gate_eigenvalues(deficient, exact_estimates(deficient, self.noise))



class TestNoiseRecovery(unittest.TestCase):
    """Checks probability recovery and the estimation report."""

    def setUp(self):
        self.circuit, self.noise, self.design = build_test_problem("small", "lognormal")

    def test_recover_true_probabilities(self):
        distributions = recover_probabilities(self.circuit, self.noise.gate_eigenvalues())
        self.assertEqual(set(distributions), set(self.noise.channels))
        for gate_id, probs in distributions.items():
            self.assertTrue(np.allclose(probs,
                self.noise.channel(gate_id).probabilities, atol=1e-12))
        model = estimated_noise_model(self.circuit, self.noise.gate_eigenvalues())
        self.assertTrue(np.allclose(model.gate_eigenvalues(),
            self.noise.gate_eigenvalues()))
        self.assertEqual(model.generator, "estimated")
        with self.assertRaises(ValueError):
            recover_probabilities(self.circuit, np.ones(5))

    def test_projection(self):
        """Eigenvalues outside the feasible set still give distributions."""
        eigenvalues = self.noise.gate_eigenvalues().copy()
        eigenvalues[0] = 1.0
        eigenvalues[1] = 0.9
        for probs in recover_probabilities(self.circuit, eigenvalues).values():
            self.assertTrue(np.all(probs >= 0))
            self.assertAlmostEqual(probs.sum(), 1.0)

    def test_residuals(self):
        estimates = exact_estimates(self.design, self.noise)
        rows = circuit_eigenvalue_residuals(self.design, estimates, self.noise)
        self.assertEqual(len(rows), self.design.num_rows)
        self.assertTrue(all(abs(row[5]) < 1e-12 for row in rows))
        with tempfile.TemporaryDirectory() as tmp_dir:
            filepath = os.path.join(tmp_dir, "residuals.csv")
            save_residuals(rows, filepath)
            with open(filepath, "r", encoding="utf-8") as fhandle:
                saved = list(csv.DictReader(fhandle))
        self.assertEqual(len(saved), len(rows))
        self.assertEqual(saved[0]["pauli"], rows[0][2])

    def test_report(self):
        """Reports with ground truth carry metrics and write three files."""
        estimates = exact_estimates(self.design, self.noise)
        fit = fit_gate_eigenvalues(self.design, estimates, "WLS")
        report = EstimationReport(self.circuit, estimates, fit, self.noise,
                1e6, 1e6)
        self.assertAlmostEqual(report.metrics["nrmse"], 0.0, places=4)
        self.assertEqual(report.metrics["type_counts"], {"Hadamard":2,
            "Pauli":6, "identity":3, "controlled-Z":1, "controlled-X":1,
            "measurement":9})
        self.assertTrue(all(v < 1e-8 for v in report.metrics["gate_tvd"].values()))

        with tempfile.TemporaryDirectory() as tmp_dir:
            report_path = os.path.join(tmp_dir, "out", "report.json")
            report.save(report_path)
            report.save_distributions(os.path.join(tmp_dir, "distributions.csv"))
            report.save_metrics(os.path.join(tmp_dir, "metrics.csv"))
            with open(report_path, "r", encoding="utf-8") as fhandle:
                saved = json.load(fhandle)
            with open(os.path.join(tmp_dir, "metrics.csv"), "r",
                    encoding="utf-8") as fhandle:
                metric_rows = list(csv.reader(fhandle))
        self.assertEqual(saved["format"], "estimation_report")
        self.assertEqual(len(saved["gate_eigenvalues"]), self.design.num_cols)
        self.assertEqual(metric_rows[1][0], "NRMSE")

        no_truth = EstimationReport(self.circuit, estimates, fit)
        self.assertIsNone(no_truth.metrics)
        with self.assertRaises(ValueError):
            no_truth.save_metrics("metrics.csv")
        with self.assertRaises(ValueError):
            EstimationReport(self.circuit, estimates, fit, self.noise)


if __name__ == "__main__":
    unittest.main()
