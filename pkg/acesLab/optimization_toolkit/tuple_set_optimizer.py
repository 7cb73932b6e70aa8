"""Greedy optimisation of the tuple set by excursions. Each excursion first
grows the set with random tuples, keeping those that reduce the figure of
merit, up to l_set + l_ex tuples; it then shrinks the set by repeatedly
removing the tuple whose removal gives the smallest figure of merit, while
that removal improves the figure of merit or the set is larger than
l_set. The best tuple set seen at the end of an excursion is kept, so the
final figure of merit never exceeds that of the starting set."""
import csv
import os
import warnings

import numpy as np

from .optimiser_config import OptimiserConfig
from .shot_weight_optimizer import optimise_shot_weights, optimise_tuple_weights
from .repetition_optimizer import optimise_repetitions
from .tuple_generation import sample_random_tuple
from ..design_toolkit.experimental_design import (DesignBlockCache,
        build_design_matrix)
from ..exceptions import RankDeficiencyError
from ..constants import constants



class TupleSetState():
    """A tuple set with its optimised shot weights and figure of merit."""

    def __init__(self, tuples, weight_map:dict, merit:float):
        self.tuples = [tuple(t) for t in tuples]
        self.weight_map = dict(weight_map)
        self.merit = float(merit)

    def weights(self) -> np.ndarray:
        return np.array([self.weight_map[t] for t in self.tuples])



def optimise_tuple_set(circuit, noise, config:OptimiserConfig = None,
        estimator_kind:str = "WLS", initial_tuples = None, initial_weights = None,
        time_accounting:bool = True, verbose:bool = False) -> tuple:
    """Optimises the tuple set and shot weights of a design.

    Args:
        circuit (Circuit): The circuit.
        noise: A NoiseModel or gate eigenvalue vector.
        config (OptimiserConfig): The hyperparameters. If None, defaults.
        estimator_kind (str): One of "OLS", "WLS", "GLS".
        initial_tuples (list): The starting tuple set. If None, the basic
            tuple set together with the repeated tuple set, whose
            repetition numbers are optimised first.
        initial_weights: Starting shot weights for initial_tuples.
        time_accounting (bool): If False, S' = S.
        verbose (bool): If True, prints progress.

    Returns:
        design (ExperimentalDesign): The optimised design, with optimised
            shot weights.
        merit (float): Its figure of merit.
        history (list): Dicts with keys stage, step, merit, action, tuple.

    Raises:
        RankDeficiencyError: If the starting tuple set is rank deficient.
    """
    if config is None:
        config = OptimiserConfig()
    rng = np.random.default_rng(config.seed)
    block_cache = DesignBlockCache(circuit)
    history = []

    if initial_tuples is None:
        repetitions, tuples, weight_map, merit, _ = optimise_repetitions(circuit,
                noise, config, estimator_kind, block_cache = block_cache,
                time_accounting = time_accounting, verbose = verbose)
        history.append({"stage":"repetitions", "step":0, "merit":merit,
            "action":"start", "tuple":str(repetitions)})
    else:
        tuples = [tuple(int(u) for u in t) for t in initial_tuples]
        weight_map = None
        if initial_weights is not None:
            weight_map = dict(zip(tuples, np.asarray(initial_weights, dtype=np.float64)))
        merit, weight_map = optimise_tuple_weights(circuit, noise, tuples,
                weight_map, config, estimator_kind, block_cache,
                time_accounting = time_accounting)
        history.append({"stage":"initial", "step":0, "merit":merit,
            "action":"start", "tuple":""})

    def evaluate(trial_tuples, weight_map):
        return optimise_tuple_weights(circuit, noise, trial_tuples, weight_map,
                config, estimator_kind, block_cache,
                time_accounting = time_accounting)

    if not np.isfinite(merit):
        raise RankDeficiencyError("The starting tuple set is rank deficient.")
    current = TupleSetState(tuples, weight_map, merit)
    best = current
    l_set = config.target_set_size(circuit)
    step = 0

    for excursion in range(config.n_ex):
        target = l_set + config.l_ex
        trials = config.f_trial * max(target - len(current.tuples), 0)
        duplicates = 0
        while len(current.tuples) < target and trials > 0:
            new_tuple = sample_random_tuple(circuit, rng)
            if new_tuple in current.tuples:
                duplicates += 1
                if duplicates > constants.MAX_TUPLE_ATTEMPTS:
                    break
                continue
            trials -= 1
            step += 1
            trial_tuples = current.tuples + [new_tuple]
            merit, weight_map = evaluate(trial_tuples, current.weight_map)
            if merit < current.merit:
                current = TupleSetState(trial_tuples, weight_map, merit)
                history.append({"stage":f"growth_{excursion}", "step":step,
                    "merit":merit, "action":"add", "tuple":str(new_tuple)})
                if len(new_tuple) > constants.SHALLOW_TUPLE_DEPTH:
                    warnings.warn(f"Accepted a random tuple of depth {len(new_tuple)}; "
                            "optimised tuples are usually shallower.")

        while len(current.tuples) > 1:
            candidates = []
            for k in range(len(current.tuples)):
                trial_tuples = current.tuples[:k] + current.tuples[k+1:]
                merit, weight_map = evaluate(trial_tuples, current.weight_map)
                candidates.append((merit, k, trial_tuples, weight_map))
            merit, k, trial_tuples, weight_map = min(candidates, key=lambda c: c[:2])
            if not np.isfinite(merit):
                break
            if merit >= current.merit and len(current.tuples) <= l_set:
                break
            step += 1
            history.append({"stage":f"shrink_{excursion}", "step":step,
                "merit":merit, "action":"remove", "tuple":str(current.tuples[k])})
            current = TupleSetState(trial_tuples, weight_map, merit)

        if current.merit < best.merit:
            best = current
        else:
            current = best
        if verbose:
            print(f"Excursion {excursion} complete, {len(best.tuples)} tuples, "
                    f"F = {best.merit}")

    design = build_design_matrix(circuit, best.tuples, best.weights(),
            block_cache = block_cache, check_rank = False)
    weights, merit, _ = optimise_shot_weights(design, noise, config, estimator_kind,
            time_accounting = time_accounting)
    history.append({"stage":"final", "step":step + 1, "merit":merit,
        "action":"optimise_weights", "tuple":""})
    if verbose:
        print(f"Tuple set optimisation complete, F = {merit}")
    return design.with_shot_weights(weights), merit, history


def save_history(history:list, filepath:str):
    """Writes an optimisation history to CSV, one row per entry, with the
    union of the entry keys as columns."""
    fieldnames = list(dict.fromkeys(key for entry in history for key in entry))
    dirname = os.path.dirname(filepath)
    if dirname:
        os.makedirs(dirname, exist_ok=True)
    with open(filepath, "w", newline="", encoding="utf-8") as fhandle:
        writer = csv.DictWriter(fhandle, fieldnames=fieldnames)
        writer.writeheader()
        for entry in history:
            writer.writerow({key:("" if value is None else value)
                for key, value in entry.items()})
