"""Generates the repeated tuple set, whose tuples are repeated many times
to amplify small gate eigenvalues, and random tuples for the tuple set
optimiser.

Random tuples draw their length from a generalised Zipf distribution
with exponent 1 on [1, 2l], l the number of circuit layers. With
probability 1/2 the tuple is a mirror tuple: its first floor((L - 1) / 2)
entries are followed by the same entries reversed, then one or two free
entries. With probability 1/2 each index is appended once, otherwise a
Zipf(2) number of times. Dynamically decoupled circuits append pairs of
indices instead, with the copy number halved and rounded up, and never
place two multi-qubit layers next to each other; tuples violating this
at the mirror point or the free tail are redrawn."""
import numpy as np
from scipy import stats

from ..constants import constants


def repeated_tuple_set(circuit) -> list:
    """The patterns of the repeated tuple set. For circuits without
    dynamical decoupling this is one single-layer pattern per unique
    layer. For dynamically decoupled circuits, single-qubit layers appear
    alone and each multi-qubit layer u appears as (u, dd, u, dd).

    Returns:
        patterns (list): Tuples, each to be repeated an odd number of times.
    """
    dd_id = circuit.dd_layer_id()
    if not circuit.dynamically_decoupled or dd_id is None:
        return [(u,) for u in circuit.unique_ids()]
    multi = set(circuit.multi_qubit_ids())
    patterns = []
    for uid in circuit.unique_ids():
        if uid in multi:
            patterns.append((uid, dd_id, uid, dd_id))
        else:
            patterns.append((uid,))
    return patterns


def expand_repeated(pattern, repetitions:int) -> tuple:
    """The tuple repeating a pattern a number of times.

    Raises:
        ValueError: If repetitions is not a positive integer.
    """
    if int(repetitions) != repetitions or repetitions < 1:
        raise ValueError("repetitions must be a positive integer.")
    return tuple(pattern) * int(repetitions)


def zipf_sample(rng, exponent:float, u_max:int) -> int:
    """Draws from the generalised Zipf distribution on [1, u_max] with
    weights 1 / u^exponent. An infinite exponent always gives 1."""
    if u_max < 1:
        raise ValueError("u_max must be at least 1.")
    if np.isinf(exponent) or u_max == 1:
        return 1
    return int(stats.zipfian.rvs(exponent, u_max, random_state=rng))


def _has_adjacent_multi(entries, multi:set) -> bool:
    return any(a in multi and b in multi for a, b in zip(entries[:-1], entries[1:]))


def _random_body(circuit, rng, length:int, copy_exponent:float) -> list:
    multi = set(circuit.multi_qubit_ids())
    all_ids = circuit.unique_ids()
    single_ids = [u for u in all_ids if u not in multi]
    body = []
    while len(body) < length:
        copies = zipf_sample(rng, copy_exponent, length)
        if circuit.dynamically_decoupled:
            first_choices = single_ids if body and body[-1] in multi else all_ids
            first = first_choices[rng.integers(len(first_choices))]
            second_choices = single_ids if first in multi else all_ids
            second = second_choices[rng.integers(len(second_choices))]
            unit = [first, second]
            copies = -(-copies // 2)
        else:
            unit = [all_ids[rng.integers(len(all_ids))]]
        body += unit * copies
    return body[:length]


def sample_random_tuple(circuit, rng) -> tuple:
    """Draws a random tuple for the tuple set optimiser.

    Args:
        circuit (Circuit): The circuit.
        rng (np.random.Generator): The random number generator.

    Returns:
        layer_tuple (tuple): A non-empty tuple of unique layer ids.

    Raises:
        ValueError: If a dynamically decoupled circuit has no single-qubit
            layer, or no valid tuple is found.
    """
    multi = set(circuit.multi_qubit_ids())
    if circuit.dynamically_decoupled and len(multi) == circuit.num_unique:
        raise ValueError("A dynamically decoupled circuit needs single-qubit layers.")
    for _ in range(constants.MAX_TUPLE_ATTEMPTS):
        length = zipf_sample(rng, 1, 2 * circuit.num_layers)
        mirror = rng.random() < 0.5
        copy_exponent = np.inf if rng.random() < 0.5 else 2
        half = (length - 1) // 2
        if mirror and half > 0:
            head = _random_body(circuit, rng, half, copy_exponent)
            tail = _random_body(circuit, rng, length - 2 * half, copy_exponent)
            entries = head + head[::-1] + tail
        else:
            entries = _random_body(circuit, rng, length, copy_exponent)
        if not circuit.dynamically_decoupled or not _has_adjacent_multi(entries, multi):
            return tuple(int(u) for u in entries)
    raise ValueError("Could not generate a valid random tuple.")


def is_mirror_tuple(layer_tuple) -> bool:
    """Whether the first floor((L - 1) / 2) entries of a tuple are followed
    by the same entries reversed."""
    half = (len(layer_tuple) - 1) // 2
    if half < 1:
        return False
    return tuple(layer_tuple[half:2*half]) == tuple(layer_tuple[:half][::-1])
