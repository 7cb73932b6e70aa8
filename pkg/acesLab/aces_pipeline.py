"""Describes the ACESPipeline class, which wires together a circuit, a
noise model, design optimisation, performance prediction, simulation
and estimation for a single ACES noise characterisation study."""
import numpy as np

from .circuits.circuit_generators import build_circuit
from .noise_toolkit.noise_generators import build_noise_model
from .design_toolkit.experimental_design import (build_basic_design,
        transfer_design, load_reference_design)
from .scoring_toolkit.merit_calcs import merit
from .scoring_toolkit.gate_covariance import GateCovariance, check_estimator_kind
from .scoring_toolkit.chi_squared import nrmse_distribution
from .optimization_toolkit.optimiser_config import OptimiserConfig
from .optimization_toolkit.shot_weight_optimizer import optimise_shot_weights
from .optimization_toolkit.tuple_set_optimizer import optimise_tuple_set
from .simulation_toolkit.frame_simulator import simulate_design
from .fitting_toolkit.eigenvalue_estimation import estimate_circuit_eigenvalues
from .fitting_toolkit.least_squares_fitting import fit_gate_eigenvalues
from .fitting_toolkit.noise_recovery import EstimationReport
from .constants import constants



class ACESPipeline():
    """Runs an ACES study on one circuit under one noise model.

    Attributes:
        circuit (Circuit): The circuit being characterised.
        noise (NoiseModel): The noise model, used both as the design
            target and as the truth for simulation.
        estimator_kind (str): One of "OLS", "WLS", "GLS", used for
            prediction and design optimisation.
        optimiser_config (OptimiserConfig): The optimiser hyperparameters.
        design (ExperimentalDesign): The current design; the basic design
            until another is set or optimised.
        history (list): The history of the last design optimisation.
        verbose (bool): If True, regular updates are printed.
        num_threads (int): The number of threads used for simulation.
    """

    def __init__(self, circuit_kind:str = "rotated", distance:int = 3,
            noise_kind:str = "depolarising", noise_params:dict = None,
            noise_seed:int = 0, estimator_kind:str = "WLS",
            optimiser_params:dict = None, verbose:bool = True,
            num_threads:int = 1, circuit = None,
            noise = None, design = None):
        """Constructor.

        Args:
            circuit_kind (str): One of "rotated", "unrotated".
            distance (int): The code distance.
            noise_kind (str): One of "depolarising", "lognormal".
            noise_params (dict): Overrides for constants.default_noise_params.
            noise_seed (int): The seed of a log-normal noise model.
            estimator_kind (str): One of "OLS", "WLS", "GLS".
            optimiser_params (dict): Overrides for
                constants.default_optimiser_params.
            verbose (bool): If True, regular updates are printed.
            num_threads (int): The number of simulation threads.
            circuit (Circuit): If supplied, used instead of building a
                circuit from circuit_kind and distance.
            noise (NoiseModel): If supplied, used instead of building a
                noise model from noise_kind, noise_params and noise_seed.
            design (ExperimentalDesign): If supplied, the starting design;
                otherwise the basic design.

        Raises:
            ValueError: If any argument is invalid.
        """
        if num_threads < 1:
            raise ValueError("num_threads must be at least 1.")
        if circuit is None:
            circuit = build_circuit(circuit_kind, distance)
        self.circuit = circuit
        if noise is None:
            noise = build_noise_model(circuit, noise_kind, noise_params, noise_seed)
        elif noise.circuit is not circuit:
            raise ValueError("The noise model was built for another circuit.")
        self.noise = noise
        self.estimator_kind = check_estimator_kind(estimator_kind)
        if optimiser_params is None:
            optimiser_params = {}
        self.optimiser_config = OptimiserConfig(**optimiser_params)
        self.verbose = verbose
        self.num_threads = num_threads
        self.history = []
        if design is None:
            self.design = build_basic_design(circuit)
        else:
            self.set_design(design)


    def use_reference_design(self):
        """Replaces the design with the bundled reference design for this
        circuit's distance.

        Raises:
            ValueError: If the circuit is not a rotated surface code.
        """
        if self.circuit.metadata.get("family") != "rotated":
            raise ValueError("The reference design is only available for the "
                    "rotated surface code.")
        self.design = load_reference_design(self.circuit.metadata["distance"])
        self.design = transfer_design(self.design, self.circuit)

    def set_design(self, design):
        """Sets the design, transferring it to this circuit if it was
        built for another circuit of the same family."""
        if design.circuit is not self.circuit:
            design = transfer_design(design, self.circuit)
        self.design = design

    def optimise_shot_weights(self) -> float:
        """Optimises the shot weights of the current design and returns
        its figure of merit."""
        weights, merit_value, self.history = optimise_shot_weights(self.design,
                self.noise, self.optimiser_config, self.estimator_kind,
                verbose = self.verbose)
        self.design = self.design.with_shot_weights(weights)
        return merit_value

    def optimise_design(self) -> float:
        """Optimises the tuple set, repetition numbers and shot weights
        and returns the figure of merit of the resulting design."""
        self.design, merit_value, self.history = optimise_tuple_set(self.circuit,
                self.noise, self.optimiser_config, self.estimator_kind,
                verbose = self.verbose)
        return merit_value

    def predict(self, time_accounting:bool = True):
        """The MeritReport of the current design."""
        return merit(self.design, self.noise, self.estimator_kind, time_accounting)

    def error_distribution(self, method:str = "monte_carlo",
            num_draws:int = constants.MIN_DISTRIBUTION_DRAWS, seed:int = 0,
            time_accounting:bool = True):
        """The predicted distribution of the normalised RMS error."""
        gate_cov = GateCovariance(self.design, self.noise, self.estimator_kind)
        shots_ratio = self.design.shots_ratio() if time_accounting else 1.0
        return nrmse_distribution(gate_cov.sigma(), shots_ratio, method,
                num_draws, seed)

    def simulate(self, measurement_budget:float, seed:int, mode:str = "frame"):
        """Simulates the current design; returns an OutcomeDataset."""
        return simulate_design(self.design, self.noise, measurement_budget, seed,
                mode, self.num_threads, self.verbose)

    def estimate(self, dataset, method:str = "WLS",
            compare_to_truth:bool = True) -> EstimationReport:
        """Estimates the gate noise from a dataset for the current design.

        Args:
            dataset (OutcomeDataset): The outcome counts.
            method (str): One of "OLS", "WLS", "FGLS".
            compare_to_truth (bool): If True, the report includes metrics
                against the pipeline's noise model.

        Returns:
            report (EstimationReport): The estimates and metrics.
        """
        estimates = estimate_circuit_eigenvalues(dataset, self.design)
        offsets = dataset.experiment_offsets
        tuple_shots = np.array([dataset.experiment_shots[offsets[k]:offsets[k+1]].sum()
            for k in range(len(self.design.blocks))], dtype=np.float64)
        fit = fit_gate_eigenvalues(self.design, estimates, method, tuple_shots)
        budget = dataset.metadata.get("measurement_budget", float(dataset.total_shots()))
        s_prime = budget * self.design.shots_ratio()
        if self.verbose:
            print(f"Fit complete using {fit.method_used}")
        return EstimationReport(self.circuit, estimates, fit,
                self.noise if compare_to_truth else None, budget, s_prime)

    def run(self, measurement_budget:float, seed:int, method:str = "WLS",
            mode:str = "frame") -> tuple:
        """Simulates the current design and estimates the noise.

        Returns:
            dataset (OutcomeDataset): The simulated counts.
            report (EstimationReport): The estimates with metrics.
        """
        dataset = self.simulate(measurement_budget, seed, mode)
        return dataset, self.estimate(dataset, method)
