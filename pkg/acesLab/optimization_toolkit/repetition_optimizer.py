"""Optimises the repetition numbers of the repeated tuple set by coordinate
descent over odd integers, with the basic tuple set included throughout.
Each repetition number starts at the nearest odd integer to the toy model
optimum for the smallest gate eigenvalue the pattern amplifies."""
import numpy as np

from .optimiser_config import OptimiserConfig
from .shot_weight_optimizer import optimise_tuple_weights
from .tuple_generation import repeated_tuple_set, expand_repeated
from ..design_toolkit.experimental_design import DesignBlockCache, basic_tuple_set
from ..noise_toolkit.noise_model import NoiseModel, gate_eigenvalue_keys
from ..scoring_toolkit.toy_model import toy_optimal
from ..constants import constants


def gate_eigenvalue_array(circuit, noise) -> np.ndarray:
    """The gate eigenvalue vector of a NoiseModel, or a checked copy of
    an eigenvalue vector."""
    if isinstance(noise, NoiseModel):
        return noise.gate_eigenvalues()
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != (circuit.gate_eigenvalue_count(),):
        raise ValueError("There must be one gate eigenvalue per gate eigenvalue key.")
    return noise


def layer_eigenvalue_summary(circuit, noise) -> tuple:
    """The smallest gate eigenvalue of each unique layer and the mean
    measurement eigenvalue."""
    eigenvalues = gate_eigenvalue_array(circuit, noise)
    layer_min = np.ones(circuit.num_unique)
    meas = []
    for key, value in zip(gate_eigenvalue_keys(circuit), eigenvalues):
        if key[0] == "meas":
            meas.append(value)
        else:
            layer_min[key[0]] = min(layer_min[key[0]], value)
    return layer_min, float(np.mean(meas))


def nearest_odd(value:float) -> int:
    return int(2 * np.round((value - 1) / 2) + 1)


def initial_repetition(circuit, pattern, layer_min:np.ndarray, lam_m:float,
        max_repetition:int = constants.default_optimiser_params["max_repetition"],
        time_accounting:bool = True) -> int:
    """The starting repetition number for a pattern: the nearest odd
    integer to the toy model optimum, with lambda the product of the
    smallest eigenvalues of the pattern's layers and tau the measurement
    and reset time relative to the pattern time, clamped to
    [1, max_repetition]."""
    lam = float(np.prod([layer_min[u] for u in pattern]))
    lam = min(max(lam, 1e-12), 1.0)
    lam_m = min(max(lam_m, 1e-12), 1 - 1e-12)
    pattern_time = sum(circuit.unique_layers[u].layer_time for u in pattern)
    if pattern_time > 0:
        tau = circuit.meas_reset_time / pattern_time
    else:
        tau = constants.TOY_TAU
    if tau <= 0:
        tau = constants.TOY_TAU
    phi_opt, _, _ = toy_optimal(lam, lam_m, tau, time_accounting)
    upper = max_repetition if max_repetition % 2 == 1 else max_repetition - 1
    return int(min(max(nearest_odd(phi_opt), 1), max(upper, 1)))


def repeated_tuples(patterns, repetitions) -> list:
    return [expand_repeated(p, r) for p, r in zip(patterns, repetitions)]


def optimise_repetitions(circuit, noise, config:OptimiserConfig = None,
        estimator_kind:str = "WLS", patterns = None, initial_repetitions = None,
        block_cache:DesignBlockCache = None, time_accounting:bool = True,
        verbose:bool = False) -> tuple:
    """Optimises the repetition numbers of the repeated tuple set.

    Each coordinate moves in steps of 2, doubling the step after every
    improving move and trying the opposite direction only if the first
    made no move. Shot weights are re-optimised, warm started, before
    every evaluation. The descent stops after a full cycle over the
    patterns without improvement.

    Args:
        circuit (Circuit): The circuit.
        noise: A NoiseModel or gate eigenvalue vector.
        config (OptimiserConfig): The hyperparameters. If None, defaults.
        estimator_kind (str): One of "OLS", "WLS", "GLS".
        patterns (list): The patterns to repeat; repeated_tuple_set if None.
        initial_repetitions (list): Starting odd repetition numbers; the
            toy model initialisation if None.
        block_cache (DesignBlockCache): A cache of tuple blocks.
        time_accounting (bool): If False, S' = S.
        verbose (bool): If True, prints progress.

    Returns:
        repetitions (list): The optimised repetition numbers.
        tuples (list): The basic tuple set followed by the repeated tuples.
        weight_map (dict): The optimised shot weight of each tuple.
        merit (float): The figure of merit at the optimum.
        history (list): Dicts with keys pattern, repetitions, merit, action.
    """
    if config is None:
        config = OptimiserConfig()
    if block_cache is None:
        block_cache = DesignBlockCache(circuit)
    if patterns is None:
        patterns = repeated_tuple_set(circuit)
    patterns = [tuple(p) for p in patterns]
    upper = config.max_repetition
    if initial_repetitions is None:
        layer_min, lam_m = layer_eigenvalue_summary(circuit, noise)
        repetitions = [initial_repetition(circuit, p, layer_min, lam_m, upper,
            time_accounting) for p in patterns]
    else:
        repetitions = [int(r) for r in initial_repetitions]
        if len(repetitions) != len(patterns) or any(r < 1 or r % 2 == 0
                for r in repetitions):
            raise ValueError("There must be one odd, positive repetition "
                    "number per pattern.")
    basic = basic_tuple_set(circuit)

    def evaluate(reps, weight_map):
        tuples = list(dict.fromkeys(basic + repeated_tuples(patterns, reps)))
        merit, weights = optimise_tuple_weights(circuit, noise, tuples, weight_map,
                config, estimator_kind, block_cache, time_accounting = time_accounting)
        return merit, weights, tuples

    best, weight_map, tuples = evaluate(repetitions, None)
    history = [{"pattern":None, "repetitions":list(repetitions), "merit":best,
        "action":"start"}]
    if verbose:
        print(f"Initial repetitions {repetitions}, F = {best}")

    improved = True
    while improved:
        improved = False
        for k in range(len(patterns)):
            moved = False
            for direction in (1, -1):
                step = 2
                while True:
                    candidate = min(max(repetitions[k] + direction * step, 1), upper)
                    if candidate % 2 == 0:
                        candidate -= direction
                    if candidate == repetitions[k] or candidate < 1:
                        break
                    trial = list(repetitions)
                    trial[k] = candidate
                    merit, trial_weights, trial_tuples = evaluate(trial, weight_map)
                    if merit >= best:
                        break
                    repetitions, best = trial, merit
                    weight_map, tuples = trial_weights, trial_tuples
                    moved = improved = True
                    step *= 2
                    history.append({"pattern":patterns[k],
                        "repetitions":list(repetitions), "merit":best,
                        "action":"accept"})
                if moved:
                    break
        if verbose:
            print(f"Repetition cycle complete, repetitions {repetitions}, F = {best}")
    return repetitions, tuples, weight_map, best, history
