"""Walsh-Hadamard transforms between Pauli error probabilities and
Pauli eigenvalues, together with the simplex projection, marginalisation
and distance functions used when recovering and comparing Pauli channels.

Probability and eigenvalue vectors on b qubits are indexed by the local
Pauli index (x_1, ..., x_b, z_1, ..., z_b), most significant bit first,
so that index 0 is the identity. The eigenvalue transform uses the
symplectic form, which equals the ordinary bitwise dot product after the
x and z halves of one index are exchanged; we therefore use the fast
Hadamard transform followed by a fixed permutation."""
import numpy as np


def fast_hadamard_transform(input_arr:np.ndarray) -> np.ndarray:
    """Performs an unnormalized fast Hadamard transform along the
    last axis of the input, returning a new array. The last axis
    must have a length that is a power of 2.

    Args:
        input_arr (np.ndarray): The input array, shape (..., 2^k).

    Returns:
        output_arr (np.ndarray): An array of the same shape, equal to
            input_arr @ H where H is the Sylvester Hadamard matrix.

    Raises:
        ValueError: If the last axis is not a power of 2.
    """
    output_arr = np.array(input_arr, dtype=np.float64, copy=True)
    dim = output_arr.shape[-1]
    if dim < 1 or dim & (dim - 1) != 0:
        raise ValueError("The fast Hadamard transform requires a power of 2 length.")
    lead_shape = output_arr.shape[:-1]
    h = 1
    while h < dim:
        output_arr = output_arr.reshape(lead_shape + (dim // (2 * h), 2, h))
        left = output_arr[..., 0, :].copy()
        right = output_arr[..., 1, :]
        output_arr[..., 0, :] += right
        output_arr[..., 1, :] = left - right
        h *= 2
    return output_arr.reshape(lead_shape + (dim,))


def _num_qubits(length:int) -> int:
    """The number of qubits b for a vector of length 4^b."""
    nqubits = 0
    while 4**nqubits < length:
        nqubits += 1
    if 4**nqubits != length or length < 4:
        raise ValueError("Pauli channel vectors must have length 4^b with b >= 1.")
    return nqubits


def symplectic_swap_permutation(nqubits:int) -> np.ndarray:
    """The permutation exchanging the x and z halves of each local
    Pauli index on nqubits qubits. It is an involution."""
    idx = np.arange(4**nqubits)
    low_mask = (1 << nqubits) - 1
    return ((idx & low_mask) << nqubits) | (idx >> nqubits)


def wht_forward(probabilities, check_input:bool = True) -> np.ndarray:
    """Converts a Pauli error distribution on b qubits to the Pauli
    eigenvalues lambda_a' = sum_a (-1)^omega(a, a') p_a.

    Args:
        probabilities: An array of shape (..., 4^b). Each row is a
            distribution over the local Pauli indices.
        check_input (bool): If True, each row is checked to be a valid
            distribution.

    Returns:
        eigenvalues (np.ndarray): An array of the same shape. The
            identity entry is 1 for any valid distribution.

    Raises:
        ValueError: If the length is not a power of 4 or, when checking,
            if any entry is negative or a row does not sum to 1.
    """
    probabilities = np.asarray(probabilities, dtype=np.float64)
    nqubits = _num_qubits(probabilities.shape[-1])
    if check_input:
        if np.any(probabilities < 0):
            raise ValueError("Pauli error probabilities must be non-negative.")
        if not np.allclose(probabilities.sum(axis=-1), 1, rtol=0, atol=1e-9):
            raise ValueError("Pauli error probabilities must sum to 1.")
    transformed = fast_hadamard_transform(probabilities)
    return transformed[..., symplectic_swap_permutation(nqubits)]


def wht_inverse(eigenvalues) -> np.ndarray:
    """Converts Pauli eigenvalues on b qubits back to the (quasi-)
    probabilities p_a = 4^-b sum_a' (-1)^omega(a, a') lambda_a'.
    The output may have negative entries if the eigenvalues are
    estimates; the caller is responsible for projecting it.

    Args:
        eigenvalues: An array of shape (..., 4^b).

    Returns:
        probabilities (np.ndarray): An array of the same shape.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
    nqubits = _num_qubits(eigenvalues.shape[-1])
    permuted = eigenvalues[..., symplectic_swap_permutation(nqubits)]
    return fast_hadamard_transform(permuted) / 4**nqubits


def depolarising_constant(infidelity:float, nqubits:int) -> float:
    """The depolarising constant of a b-qubit depolarising channel with
    the given entanglement infidelity, r_b * 4^b / (4^b - 1). Each
    non-identity eigenvalue of the channel is 1 minus this constant."""
    return infidelity * 4**nqubits / (4**nqubits - 1)


def project_simplex(input_vec) -> np.ndarray:
    """Euclidean projection of a vector onto the probability simplex
    {p >= 0, sum(p) = 1}, using the sort-based algorithm.

    Args:
        input_vec: A 1d array of finite entries.

    Returns:
        projected (np.ndarray): The closest point on the simplex.

    Raises:
        ValueError: If the input is empty or not finite.
    """
    input_vec = np.asarray(input_vec, dtype=np.float64)
    if input_vec.ndim != 1 or input_vec.shape[0] == 0:
        raise ValueError("project_simplex requires a non-empty 1d array.")
    if not np.all(np.isfinite(input_vec)):
        raise ValueError("project_simplex requires finite entries.")
    sorted_vec = np.sort(input_vec)[::-1]
    cumulative = np.cumsum(sorted_vec) - 1
    ranks = np.arange(1, input_vec.shape[0] + 1)
    valid = sorted_vec - cumulative / ranks > 0
    rho = ranks[valid][-1]
    theta = cumulative[rho - 1] / rho
    return np.maximum(input_vec - theta, 0)


def marginalise(distribution, subset) -> np.ndarray:
    """Marginalises an n-qubit Pauli error distribution onto a subset
    of its qubits, summing the probabilities of all Paulis with the
    same restriction to the subset.

    Args:
        distribution: A length 4^n array indexed by the local Pauli index
            on n qubits.
        subset: A sequence of distinct qubit positions in [0, n). The
            output qubit order follows the order of this sequence.

    Returns:
        marginal (np.ndarray): A length 4^|subset| array.

    Raises:
        ValueError: If the subset is invalid.
    """
    distribution = np.asarray(distribution, dtype=np.float64)
    nqubits = _num_qubits(distribution.shape[0])
    subset = [int(q) for q in subset]
    if len(set(subset)) != len(subset) or \
            any(q < 0 or q >= nqubits for q in subset):
        raise ValueError("The subset must contain distinct qubits in [0, n).")
    if len(subset) == 0:
        return np.array([distribution.sum()])
    idx = np.arange(4**nqubits)
    nsub = len(subset)
    restricted = np.zeros(idx.shape[0], dtype=np.int64)
    for k, qubit in enumerate(subset):
        x_bit = (idx >> (2 * nqubits - 1 - qubit)) & 1
        z_bit = (idx >> (nqubits - 1 - qubit)) & 1
        restricted |= x_bit << (2 * nsub - 1 - k)
        restricted |= z_bit << (nsub - 1 - k)
    return np.bincount(restricted, weights=distribution, minlength=4**nsub)


def tvd(p_dist, q_dist) -> float:
    """Total variation distance 0.5 * sum |p - q|.

    Raises:
        ValueError: If the distributions have different lengths.
    """
    p_dist = np.asarray(p_dist, dtype=np.float64)
    q_dist = np.asarray(q_dist, dtype=np.float64)
    if p_dist.shape != q_dist.shape:
        raise ValueError("The distributions must have the same length.")
    return 0.5 * float(np.abs(p_dist - q_dist).sum())
