"""Tests the gate eigenvalue covariance, the figure of merit, the NRMSE
distribution and the closed-form toy model."""
import os
import sys
import json
import tempfile
import unittest

import numpy as np
from scipy import stats

from acesLab.circuits.circuit_generators import build_toy_circuit
from acesLab.noise_toolkit.noise_generators import depolarising_model
from acesLab.noise_toolkit.noise_model import gate_eigenvalue_keys
from acesLab.design_toolkit.experimental_design import (build_design_matrix,
        basic_time_factor)
from acesLab.scoring_toolkit.gate_covariance import GateCovariance, gate_covariance
from acesLab.scoring_toolkit.merit_calcs import (merit, merit_score,
        merit_from_traces, lognormal_ensemble_merit)
from acesLab.scoring_toolkit.chi_squared import nrmse_distribution, NRMSEDistribution
from acesLab.scoring_toolkit.toy_model import (toy_merit, toy_optimal,
        toy_optimal_weight, toy_basic_time_factor, toy_pipeline_merit,
        toy_sample_ratio)
from acesLab.exceptions import RankDeficiencyError
from acesLab.constants import constants

sys.path.append(os.path.join(os.path.dirname(os.path.abspath(__file__)), ".."))
from utils.circuit_builders import build_test_problem, RANDOM_STATE


class TestFigureOfMerit(unittest.TestCase):
    """Checks the figure of merit on small designs."""

    def test_square_design_estimators_agree(self):
        """The basic design is square and invertible, so every estimator
        reduces to A^-1 and has the same figure of merit."""
        _, noise, design = build_test_problem("rotated")
        self.assertEqual(design.num_rows, design.num_cols)
        merits = [merit(design, noise, kind).merit for kind in ("OLS", "WLS", "GLS")]
        self.assertTrue(np.allclose(merits, merits[0], rtol=1e-6))

    def test_gls_is_best(self):
        """GLS has the smallest tr(Sigma) once the design is
        overdetermined."""
        circuit, noise, design = build_test_problem("small", "lognormal")
        tuples = design.tuples + [(1, 2, 1, 2), (0, 3, 0)]
        larger = build_design_matrix(circuit, tuples)
        self.assertTrue(larger.num_rows > larger.num_cols)
        ols, wls, gls = (merit(larger, noise, kind).trace_sigma
                for kind in ("OLS", "WLS", "GLS"))
        self.assertTrue(gls <= wls * (1 + 1e-8))
        self.assertTrue(gls <= ols * (1 + 1e-8))

    def test_time_accounting(self):
        """Time accounting scales tr(Sigma) by S'/S, so F changes by the
        square root of the shots ratio."""
        circuit, noise, design = build_test_problem("small")
        larger = build_design_matrix(circuit, design.tuples + [(0, 1, 0)])
        with_time = merit(larger, noise, "GLS")
        without_time = merit(larger, noise, "GLS", time_accounting = False)
        ratio = larger.shots_ratio()
        self.assertAlmostEqual(with_time.shots_ratio, ratio)
        self.assertAlmostEqual(with_time.merit / without_time.merit, np.sqrt(ratio))

        #The basic design under default weights has S' = S.
        self.assertAlmostEqual(design.shots_ratio(), 1.0)
        self.assertAlmostEqual(merit(design, noise).merit,
                merit(design, noise, time_accounting = False).merit)

    def test_traces_match_dense_sigma(self):
        """The reported traces agree with the dense covariance matrix."""
        _, noise, design = build_test_problem("small", "lognormal")
        sigma = gate_covariance(design, noise, "WLS")
        report = merit(design, noise, "WLS")
        self.assertAlmostEqual(report.trace_sigma / report.shots_ratio,
                np.trace(sigma), places=8)
        self.assertAlmostEqual(report.trace_sigma_sq / report.shots_ratio**2,
                (sigma**2).sum(), places=8)
        expected, variance = merit_from_traces(np.trace(sigma), (sigma**2).sum(),
                sigma.shape[0])
        self.assertAlmostEqual(report.merit, expected)
        self.assertAlmostEqual(report.variance, variance)
        self.assertTrue(np.allclose(sigma, sigma.T))

    def test_column_subset(self):
        """Restricting the traces to a subset reduces F but keeps N."""
        _, noise, design = build_test_problem("small")
        full = merit(design, noise, "GLS")
        gate_cols = [k for k, key in enumerate(design.col_keys) if key[0] != "meas"]
        subset = merit(design, noise, "GLS", column_subset = gate_cols)
        self.assertEqual(subset.num_gate_eigenvalues, design.num_cols)
        self.assertTrue(subset.merit < full.merit)

    def test_rank_deficiency(self):
        """A design without gate layers cannot identify the gate
        eigenvalues; merit raises and merit_score returns infinity."""
        circuit, noise, _ = build_test_problem("small")
        deficient = build_design_matrix(circuit, [()], check_rank = False)
        with self.assertRaises(RankDeficiencyError) as context:
            merit(deficient, noise, "GLS")
        self.assertTrue(len(context.exception.deficient_columns) > 0)
        self.assertTrue(np.isinf(merit_score(deficient, noise, "GLS")))
        with self.assertRaises(ValueError):
            GateCovariance(deficient, noise, "LASSO")

    def test_report(self):
        """The report serialises and predicts the unnormalised error."""
        _, noise, design = build_test_problem("small")
        report = merit(design, noise, "WLS")
        self.assertAlmostEqual(report.merit_sd**2, report.variance)
        self.assertAlmostEqual(report.expected_error(1e6),
                report.merit * np.sqrt(design.num_cols / 1e6))
        with tempfile.TemporaryDirectory() as tmp_dir:
            filepath = os.path.join(tmp_dir, "merit.json")
            report.save(filepath)
            with open(filepath, "r", encoding="utf-8") as fhandle:
                saved = json.load(fhandle)
        self.assertEqual(saved["format"], "merit_report")
        self.assertAlmostEqual(saved["merit"], report.merit)
        with self.assertRaises(ValueError):
            merit_from_traces(0.0, 1.0, 10)

    def test_lognormal_ensemble(self):
        """The ensemble summary is deterministic in the seeds."""
        _, _, design = build_test_problem("small")
        first = lognormal_ensemble_merit(design, [1, 2, 3])
        second = lognormal_ensemble_merit(design, [1, 2, 3])
        self.assertEqual(first, second)
        self.assertTrue(first[0] > 0)
        self.assertTrue(first[1] > 0)
        self.assertTrue(first[2] > 0)
        single = lognormal_ensemble_merit(design, [5])
        self.assertEqual(single[1], 0.0)
        with self.assertRaises(ValueError):
            lognormal_ensemble_merit(design, [])



class TestToyModel(unittest.TestCase):
    """Checks the closed-form toy model, and that it agrees with the
    matrix calculation on the toy circuit."""

    def test_time_factor(self):
        """The closed-form basic time factor matches the circuit's."""
        for tau in (1.0, 5.0, constants.TOY_TAU):
            self.assertAlmostEqual(toy_basic_time_factor(tau),
                    basic_time_factor(build_toy_circuit(1, tau)))
        self.assertAlmostEqual(toy_sample_ratio(5.0, 0, 3, 0.5),
                6.5 / toy_basic_time_factor(5.0))

    def test_matches_matrix_calculation(self):
        """The matrix figure of merit for the two-tuple toy design,
        restricted to the gate eigenvalue columns, matches the closed
        form after conversion."""
        r_1, r_m, tau, nqubits = 0.002, 0.02, constants.TOY_TAU, 2
        lam, lam_m = 1 - 4 * r_1 / 3, 1 - 2 * r_m
        circuit = build_toy_circuit(nqubits, tau)
        noise = depolarising_model(circuit, r_1, 0.005, r_m)
        gate_cols = [k for k, key in enumerate(gate_eigenvalue_keys(circuit))
                if key[0] != "meas"]
        self.assertEqual(len(gate_cols), 3 * nqubits)

        for phi, gamma in ((5, 0.6), (40, 0.8)):
            design = build_design_matrix(circuit, [(), (0,) * phi],
                    [1 - gamma, gamma])
            for time_accounting in (True, False):
                report = merit(design, noise, "GLS", time_accounting,
                        column_subset = gate_cols)
                expected = toy_pipeline_merit(lam, lam_m, tau, 0, phi, gamma,
                        nqubits, time_accounting)
                self.assertTrue(abs(report.merit / expected - 1) < 1e-6)

    def test_optimal_weight(self):
        """The optimal shot weight minimises the toy figure of merit."""
        lam, lam_m, tau = 0.999, constants.TOY_LAMBDA_M, constants.TOY_TAU
        for time_accounting in (True, False):
            gamma = toy_optimal_weight(lam, lam_m, tau, 0, 50, time_accounting)
            best = toy_merit(lam, lam_m, tau, 0, 50, gamma, time_accounting)
            for offset in (-0.01, 0.01):
                self.assertTrue(best <= toy_merit(lam, lam_m, tau, 0, 50,
                    gamma + offset, time_accounting))

    def test_optimal_repetition(self):
        """The optimal integer repetition beats its neighbours, and
        smaller gate errors need more repetitions."""
        lam_m, tau = constants.TOY_LAMBDA_M, constants.TOY_TAU
        phi_opt, gamma_opt, merit_opt = toy_optimal(0.999, lam_m, tau)
        self.assertTrue(0 < gamma_opt < 1)
        for phi in (phi_opt - 1, phi_opt + 1):
            if phi < 1:
                continue
            gamma = toy_optimal_weight(0.999, lam_m, tau, 0, phi)
            self.assertTrue(merit_opt <= toy_merit(0.999, lam_m, tau, 0, phi, gamma))
        phi_small_error, _, _ = toy_optimal(0.9999, lam_m, tau)
        self.assertTrue(phi_small_error > phi_opt)

    def test_invalid_parameters(self):
        with self.assertRaises(ValueError):
            toy_merit(1.2, 0.96, 5.0, 0, 3, 0.5)
        with self.assertRaises(ValueError):
            toy_merit(0.99, 0.96, -1.0, 0, 3, 0.5)
        with self.assertRaises(ValueError):
            toy_merit(0.99, 0.96, 5.0, 0, 3, 1.0)
        with self.assertRaises(ValueError):
            toy_merit(0.99, 0.96, 5.0, 0, 0, 0.5)



class TestNRMSEDistribution(unittest.TestCase):
    """Checks the Monte Carlo and Imhof distributions of the NRMSE."""

    def test_monte_carlo_mean_matches_merit(self):
        """The figure of merit approximates the mean of the NRMSE."""
        _, noise, design = build_test_problem("small", "lognormal")
        report = merit(design, noise, "GLS")
        sigma = gate_covariance(design, noise, "GLS")
        dist = nrmse_distribution(sigma, report.shots_ratio, seed = RANDOM_STATE)
        self.assertTrue(abs(dist.mean / report.merit - 1) < 0.02)
        self.assertTrue(abs(dist.sd / report.merit_sd - 1) < 0.15)
        again = nrmse_distribution(sigma, report.shots_ratio, seed = RANDOM_STATE)
        self.assertEqual(dist.mean, again.mean)

    def test_imhof_against_chi_squared(self):
        """With Sigma = c I, N R^2 / c is chi-squared with N degrees of
        freedom."""
        size, scale = 6, 0.3
        dist = nrmse_distribution(scale * np.eye(size), method = "imhof")
        for r_val in (0.3, 0.5, 0.7):
            expected = stats.chi2.cdf(size * r_val**2 / scale, size)
            self.assertTrue(abs(dist.cdf(r_val) - expected) < 1e-4)
        self.assertAlmostEqual(dist.quantile(0.5)**2 * size / scale,
                stats.chi2.ppf(0.5, size), places=3)

    def test_imhof_against_monte_carlo(self):
        """The two methods agree on an uneven spectrum."""
        sigma = np.diag([2.0, 1.0, 0.5, 0.1, 0.05])
        imhof = nrmse_distribution(sigma, 1.3, method = "imhof")
        monte_carlo = nrmse_distribution(sigma, 1.3, seed = RANDOM_STATE)
        self.assertTrue(abs(imhof.mean / monte_carlo.mean - 1) < 0.01)
        for prob in (0.1, 0.5, 0.9):
            r_val = monte_carlo.quantile(prob)
            self.assertTrue(abs(imhof.cdf(r_val) - prob) < 0.01)
        self.assertTrue(imhof.pdf(imhof.quantile(0.5)) > 0)
        self.assertTrue(monte_carlo.pdf(monte_carlo.quantile(0.5)) > 0)
        self.assertEqual(imhof.cdf(0.0), 0.0)

    def test_invalid_input(self):
        with self.assertRaises(ValueError):
            nrmse_distribution(np.ones((2, 3)))
        with self.assertRaises(ValueError):
            nrmse_distribution(np.eye(2), method = "saddlepoint")
        with self.assertRaises(ValueError):
            NRMSEDistribution([0.0, 0.0])
        dist = NRMSEDistribution([1.0, 2.0], num_draws = 1000)
        with self.assertRaises(ValueError):
            dist.quantile(1.0)
        self.assertEqual(set(dist.to_dict()["quantiles"].keys()),
                {"0.05", "0.5", "0.95"})


if __name__ == "__main__":
    unittest.main()
