"""Calculates the figure of merit F, the expected normalised RMS error of
the gate eigenvalue estimator, and its variance V, from second-order
Taylor expansions in the traces of Sigma:

    F = sqrt(S'/N) sqrt(tr Sigma) (1 - tr(Sigma^2) / (4 tr(Sigma)^2))
    V = (S'/2N) (tr(Sigma^2) / tr Sigma) (1 - tr(Sigma^2) / (8 tr(Sigma)^2))

Both are invariant to the measurement budget, so the traces are stored
in units where S' = 1."""
import json

import numpy as np

from .gate_covariance import GateCovariance
from ..noise_toolkit.noise_generators import lognormal_model
from ..exceptions import RankDeficiencyError
from ..constants import constants


def merit_from_traces(trace_sigma:float, trace_sigma_sq:float,
        num_gate_eigenvalues:int) -> tuple:
    """The figure of merit and its variance from S' tr(Sigma) and
    S'^2 tr(Sigma^2).

    Raises:
        ValueError: If the traces are not positive and finite.
    """
    if not (np.isfinite(trace_sigma) and trace_sigma > 0 and trace_sigma_sq > 0):
        raise ValueError("The traces of Sigma must be positive and finite.")
    ratio = trace_sigma_sq / trace_sigma**2
    merit = np.sqrt(trace_sigma / num_gate_eigenvalues) * (1 - 0.25 * ratio)
    variance = 0.5 * trace_sigma_sq / (trace_sigma * num_gate_eigenvalues) * \
            (1 - 0.125 * ratio)
    return float(merit), float(variance)



class MeritReport():
    """The predicted performance of a design.

    Attributes:
        estimator_kind (str): One of "OLS", "WLS", "GLS".
        trace_sigma (float): S' tr(Sigma).
        trace_sigma_sq (float): S'^2 tr(Sigma^2).
        merit (float): The figure of merit F.
        variance (float): The variance V of the normalised RMS error.
        num_gate_eigenvalues (int): N.
        shots_ratio (float): S' / S, fixed at 1 without time accounting.
        time_accounting (bool): Whether experiment durations are counted.
    """

    def __init__(self, estimator_kind:str, trace_sigma:float,
            trace_sigma_sq:float, num_gate_eigenvalues:int,
            shots_ratio:float = 1.0, time_accounting:bool = True):
        self.estimator_kind = estimator_kind
        self.trace_sigma = float(trace_sigma)
        self.trace_sigma_sq = float(trace_sigma_sq)
        self.num_gate_eigenvalues = int(num_gate_eigenvalues)
        self.shots_ratio = float(shots_ratio)
        self.time_accounting = time_accounting
        self.merit, self.variance = merit_from_traces(self.trace_sigma,
                self.trace_sigma_sq, self.num_gate_eigenvalues)

    @property
    def merit_sd(self) -> float:
        return float(np.sqrt(self.variance))

    def expected_error(self, measurement_budget:float) -> float:
        """The expected unnormalised RMS error sqrt(N / S') F of the
        gate eigenvalue estimates at a measurement budget."""
        return self.merit * np.sqrt(self.num_gate_eigenvalues /
                (measurement_budget * self.shots_ratio))

    def to_dict(self) -> dict:
        return {"format":"merit_report", "version":constants.FORMAT_VERSION,
                "estimator_kind":self.estimator_kind, "trace_sigma":self.trace_sigma,
                "trace_sigma_sq":self.trace_sigma_sq, "merit":self.merit,
                "variance":self.variance, "N":self.num_gate_eigenvalues,
                "shots_ratio":self.shots_ratio, "time_accounting":self.time_accounting}

    def save(self, filepath:str):
        with open(filepath, "w", encoding="utf-8") as fhandle:
            json.dump(self.to_dict(), fhandle, indent=1)



def merit(design, noise, estimator_kind:str = "WLS", time_accounting:bool = True,
        column_subset = None, shot_weights = None, cov_model = None) -> MeritReport:
    """Calculates the figure of merit of a design under known noise.

    Args:
        design (ExperimentalDesign): The design.
        noise: A NoiseModel or gate eigenvalue vector.
        estimator_kind (str): One of "OLS", "WLS", "GLS".
        time_accounting (bool): If False, S' = S, giving the figure of
            merit of sample-optimised designs.
        column_subset: If supplied, the traces are taken only over these
            gate eigenvalues; N remains the full column count.
        shot_weights: If supplied, used instead of the design's weights.
        cov_model (CovarianceModel): An optional prebuilt covariance model.

    Returns:
        report (MeritReport): The merit report.

    Raises:
        RankDeficiencyError: If the design cannot identify every gate
            eigenvalue.
    """
    gate_cov = GateCovariance(design, noise, estimator_kind, shot_weights, cov_model)
    if time_accounting:
        shots_ratio = design.shots_ratio(gate_cov.shot_weights)
    else:
        shots_ratio = 1.0
    trace_sigma, trace_sigma_sq = gate_cov.traces(column_subset)
    return MeritReport(estimator_kind, shots_ratio * trace_sigma,
            shots_ratio**2 * trace_sigma_sq, design.num_cols, shots_ratio,
            time_accounting)


def merit_score(design, noise, estimator_kind:str = "WLS", shot_weights = None,
        cov_model = None, time_accounting:bool = True) -> float:
    """The figure of merit, or constants.DEFAULT_SCORE_IF_PROBLEM if the
    design is rank deficient, so that optimisers never accept it."""
    try:
        return merit(design, noise, estimator_kind, time_accounting,
                shot_weights = shot_weights, cov_model = cov_model).merit
    except (RankDeficiencyError, np.linalg.LinAlgError):
        return constants.DEFAULT_SCORE_IF_PROBLEM


def lognormal_ensemble_merit(design, seeds, noise_params:dict = None,
        estimator_kind:str = "WLS") -> tuple:
    """Evaluates the figure of merit of a design over an ensemble of
    seeded log-normal noise models.

    Args:
        design (ExperimentalDesign): The design.
        seeds: The seeds of the noise models.
        noise_params (dict): Overrides for constants.default_noise_params.
        estimator_kind (str): One of "OLS", "WLS", "GLS".

    Returns:
        mean_merit (float): The ensemble mean of F.
        sd_merit (float): The ensemble standard deviation of F.
        mean_sqrt_variance (float): The ensemble mean of sqrt(V).
    """
    params = constants.default_noise_params.copy()
    if noise_params is not None:
        params.update(noise_params)
    seeds = list(seeds)
    if len(seeds) == 0:
        raise ValueError("At least one seed is required.")
    merits, sds = [], []
    for seed in seeds:
        noise = lognormal_model(design.circuit, params["r1"], params["r2"],
                params["rm"], params["sigma_tot_sq"], seed)
        report = merit(design, noise, estimator_kind)
        merits.append(report.merit)
        sds.append(report.merit_sd)
    sd_merit = float(np.std(merits, ddof=1)) if len(merits) > 1 else 0.0
    return float(np.mean(merits)), sd_merit, float(np.mean(sds))
