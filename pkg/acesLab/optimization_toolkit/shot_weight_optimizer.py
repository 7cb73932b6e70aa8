"""Optimises the shot weights of a design by Nesterov accelerated
gradient descent on the shot log-weights gamma, with Gamma = softmax(gamma).
A step that does not improve the figure of merit is reverted and the
velocity zeroed; if revert_limit steps are reverted within revert_window
consecutive steps, the learning rate is divided by eta_r."""
import numpy as np

from .merit_gradient import merit_gradient_log_weights, softmax
from .optimiser_config import OptimiserConfig
from ..design_toolkit.covariance_model import CovarianceModel
from ..design_toolkit.experimental_design import build_design_matrix
from ..scoring_toolkit.merit_calcs import merit_score
from ..exceptions import RankDeficiencyError
from ..constants import constants


def optimise_shot_weights(design, noise, config:OptimiserConfig = None,
        estimator_kind:str = "WLS", initial_weights = None, cov_model = None,
        max_steps:int = None, time_accounting:bool = True,
        verbose:bool = False) -> tuple:
    """Optimises the shot weights of a design.

    Args:
        design (ExperimentalDesign): The design.
        noise: A NoiseModel or gate eigenvalue vector.
        config (OptimiserConfig): The hyperparameters. If None, defaults.
        estimator_kind (str): One of "OLS", "WLS", "GLS".
        initial_weights: The starting weights. If None, the design's.
        cov_model (CovarianceModel): An optional prebuilt covariance model.
        max_steps (int): The step cap; config.max_steps if None.
        time_accounting (bool): If False, optimises the figure of merit
            with S' = S.
        verbose (bool): If True, prints progress.

    Returns:
        shot_weights (np.ndarray): The optimised weights.
        merit (float): Their figure of merit, never worse than that of
            the initial weights.
        history (list): Dicts with keys step, merit, action, eta.

    Raises:
        RankDeficiencyError: If the design is rank deficient.
    """
    if config is None:
        config = OptimiserConfig()
    if max_steps is None:
        max_steps = config.max_steps
    if cov_model is None:
        cov_model = CovarianceModel(design, noise)
    if initial_weights is None:
        initial_weights = design.shot_weights
    weights = design.check_weights(initial_weights)

    def score(log_weights):
        return merit_score(design, noise, estimator_kind, softmax(log_weights),
                cov_model, time_accounting)

    log_weights = np.log(np.clip(weights, 1e-300, None))
    current = score(log_weights)
    if not np.isfinite(current):
        raise RankDeficiencyError("The design is rank deficient; its shot "
                "weights cannot be optimised.")
    history = [{"step":0, "merit":current, "action":"start", "eta":config.eta}]
    if len(design.tuples) == 1:
        return weights, current, history

    velocity = np.zeros_like(log_weights)
    eta = config.eta
    reverted_steps, merits = [], [current]
    for step in range(1, max_steps + 1):
        lookahead = log_weights + config.mu * velocity
        _, gradient = merit_gradient_log_weights(design, noise, estimator_kind,
                softmax(lookahead), cov_model, time_accounting)
        new_velocity = config.mu * velocity - eta * gradient
        candidate = log_weights + new_velocity
        new_merit = score(candidate)

        if new_merit < current:
            log_weights, velocity, current = candidate, new_velocity, new_merit
            action = "accept"
        else:
            velocity = np.zeros_like(log_weights)
            reverted_steps.append(step)
            action = "revert"
            recent = [s for s in reverted_steps if s > step - config.revert_window]
            if len(recent) >= config.revert_limit:
                eta /= config.eta_r
                reverted_steps = []
                action = "reduce"
        merits.append(current)
        history.append({"step":step, "merit":current, "action":action, "eta":eta})
        if verbose and step % 10 == 0:
            print(f"Step {step} complete, F = {current}")

        if len(merits) > config.tol_window:
            previous = merits[-config.tol_window - 1]
            if (previous - current) <= config.rel_tol * current:
                break

    if verbose:
        print(f"Shot weight optimisation complete, F = {current}")
    return softmax(log_weights), current, history


def optimise_tuple_weights(circuit, noise, tuples, weight_map:dict = None,
        config:OptimiserConfig = None, estimator_kind:str = "WLS",
        block_cache = None, max_steps:int = None,
        time_accounting:bool = True) -> tuple:
    """Builds the design for a tuple set and optimises its shot weights,
    warm starting from the weights of tuples evaluated before. Used by the
    repetition and tuple set optimisers to score candidate tuple sets.

    Args:
        circuit (Circuit): The circuit.
        noise: A NoiseModel or gate eigenvalue vector.
        tuples (list): The tuple set.
        weight_map (dict): Maps tuples to previous shot weights. Tuples
            missing from it start at the mean of the weights found.
        config (OptimiserConfig): The hyperparameters. If None, defaults.
        estimator_kind (str): One of "OLS", "WLS", "GLS".
        block_cache (DesignBlockCache): A cache of tuple blocks.
        max_steps (int): The step cap; config.trial_max_steps if None.
        time_accounting (bool): If False, S' = S.

    Returns:
        merit (float): The optimised figure of merit, or
            constants.DEFAULT_SCORE_IF_PROBLEM if the design is rank deficient.
        weight_map (dict): Maps each tuple to its optimised shot weight.
    """
    if config is None:
        config = OptimiserConfig()
    if max_steps is None:
        max_steps = config.trial_max_steps
    tuples = [tuple(t) for t in tuples]
    initial_weights = None
    if weight_map:
        known = [weight_map[t] for t in tuples if t in weight_map]
        if len(known) > 0:
            fill = float(np.mean(known))
            initial_weights = np.array([weight_map.get(t, fill) for t in tuples])

    design = build_design_matrix(circuit, tuples, initial_weights,
            block_cache = block_cache, check_rank = False)
    try:
        weights, merit, _ = optimise_shot_weights(design, noise, config,
                estimator_kind, max_steps = max_steps,
                time_accounting = time_accounting)
    except RankDeficiencyError:
        return constants.DEFAULT_SCORE_IF_PROBLEM, dict(zip(tuples,
            design.shot_weights))
    return merit, dict(zip(tuples, weights))
