"""Generators for the circuits characterised by acesLab: the rotated
(XZZX) and unrotated surface code syndrome extraction circuits, and
the single-layer toy circuit used for the relative precision analysis.

Rotated layout: data qubit (i, j) sits on a rows x cols grid with
index i * cols + j. Measure qubits sit at plaquette centres
(i + 1/2, j + 1/2), sorted by (i, j) and numbered after the data qubits.
All (rows - 1)(cols - 1) interior plaquettes are used; top and bottom
boundary plaquettes are used when i + j is even, left and right ones
when i + j is odd. Each plaquette measures X on its NW and SE corners
and Z on its NE and SW corners. The controlled-Z gates visit the NE,
NW, SE and SW corners in the four two-qubit layers.

Unrotated layout: all qubits sit on a (2d - 1) x (2d - 1) grid with
row-major indices. Data qubits have r + c even, X-type measure qubits
have r even and c odd, and Z-type measure qubits have r odd and c even.
"""
from .circuit_classes import Layer, Circuit
from ..pauli_toolkit.clifford_gates import CliffordGate
from ..constants import constants


def _single_qubit_layer(kind_by_qubit:dict, n:int, layer_class:str = "single_qubit"):
    """A layer with one single-qubit gate on every qubit, identity
    where no gate is specified."""
    gates = [CliffordGate(kind_by_qubit.get(q, "I"), [q]) for q in range(n)]
    return Layer(gates, constants.SINGLE_QUBIT_LAYER_TIME, layer_class)


def _two_qubit_layer(pairs:list, kind:str, n:int):
    """A layer of two-qubit gates, with idle qubits padded by identities."""
    gates = [CliffordGate(kind, pair) for pair in pairs]
    used = {q for pair in pairs for q in pair}
    gates += [CliffordGate("I", [q]) for q in range(n) if q not in used]
    return Layer(gates, constants.TWO_QUBIT_LAYER_TIME, "two_qubit")


def rotated_plaquettes(rows:int, cols:int) -> list:
    """The (i, j) labels of the plaquettes of a rotated surface code,
    where (i, j) denotes the plaquette centred at (i + 1/2, j + 1/2)."""
    plaquettes = []
    for i in range(-1, rows):
        for j in range(-1, cols):
            interior_i = 0 <= i <= rows - 2
            interior_j = 0 <= j <= cols - 2
            if interior_i and interior_j:
                plaquettes.append((i, j))
            elif i in (-1, rows - 1) and interior_j and (i + j) % 2 == 0:
                plaquettes.append((i, j))
            elif j in (-1, cols - 1) and interior_i and (i + j) % 2 == 1:
                plaquettes.append((i, j))
    return plaquettes


def build_rotated_surface_circuit(distance:int, width:int = None) -> Circuit:
    """Builds the syndrome extraction circuit of a rotated (XZZX) surface
    code with 9 layers and 7 unique layers. Layers 1 and 9 are identical,
    as are layers 3 and 7, and layer 5 is the dynamical decoupling layer.

    Args:
        distance (int): The code distance; the number of data qubit rows.
            Must be odd and at least 3.
        width (int): The number of data qubit columns for rectangular
            codes. If None, the code is square.

    Returns:
        circuit (Circuit): The circuit on 2 * rows * cols - 1 qubits.

    Raises:
        ValueError: If either dimension is even or less than 3.
    """
    rows = distance
    cols = distance if width is None else width
    for dim in (rows, cols):
        if int(dim) != dim or dim < 3 or dim % 2 == 0:
            raise ValueError("Rotated surface code dimensions must be odd "
                    "integers of at least 3.")
    rows, cols = int(rows), int(cols)
    ndata = rows * cols
    plaquettes = rotated_plaquettes(rows, cols)
    n = ndata + len(plaquettes)
    measure = list(range(ndata, n))
    data = list(range(ndata))

    corner_offsets = {"NE":(0, 1), "NW":(0, 0), "SE":(1, 1), "SW":(1, 0)}
    cz_layers = {}
    for corner, (di, dj) in corner_offsets.items():
        pairs = []
        for k, (i, j) in enumerate(plaquettes):
            row, col = i + di, j + dj
            if 0 <= row < rows and 0 <= col < cols:
                pairs.append((ndata + k, row * cols + col))
        cz_layers[corner] = _two_qubit_layer(pairs, "CZ", n)

    layer_one = _single_qubit_layer({**{q:"H" for q in measure},
        **{q:"X" for q in data}}, n)
    layer_three = _single_qubit_layer({**{q:"H" for q in data},
        **{q:"X" for q in measure}}, n)
    layer_five = _single_qubit_layer({q:"X" for q in range(n)}, n,
            "dynamical_decoupling")

    layers = [layer_one, cz_layers["NE"], layer_three, cz_layers["NW"],
            layer_five, cz_layers["SE"], layer_three, cz_layers["SW"], layer_one]
    metadata = {"family":"rotated", "distance":rows, "width":cols}
    return Circuit(n, layers, constants.MEAS_RESET_TIME, True, metadata)


def build_unrotated_surface_circuit(distance:int) -> Circuit:
    """Builds the syndrome extraction circuit of an unrotated surface
    code: four layers of controlled-X gates between two identical
    Hadamard layers, giving 6 layers and 5 unique layers.

    Args:
        distance (int): The code distance, at least 2.

    Returns:
        circuit (Circuit): The circuit on (2d - 1)^2 qubits.

    Raises:
        ValueError: If the distance is invalid.
    """
    if int(distance) != distance or distance < 2:
        raise ValueError("Unrotated surface code distance must be an integer "
                "of at least 2.")
    distance = int(distance)
    side = 2 * distance - 1
    n = side**2
    x_checks = [(r, c) for r in range(side) for c in range(side)
            if r % 2 == 0 and c % 2 == 1]
    z_checks = [(r, c) for r in range(side) for c in range(side)
            if r % 2 == 1 and c % 2 == 0]
    steps = {"N":(-1, 0), "E":(0, 1), "W":(0, -1), "S":(1, 0)}
    x_order, z_order = ("N", "E", "W", "S"), ("N", "W", "E", "S")

    def neighbour(site, direction):
        row, col = site[0] + steps[direction][0], site[1] + steps[direction][1]
        if 0 <= row < side and 0 <= col < side:
            return row * side + col
        return None

    cx_layers = []
    for x_dir, z_dir in zip(x_order, z_order):
        pairs = []
        for site in x_checks:
            target = neighbour(site, x_dir)
            if target is not None:
                pairs.append((site[0] * side + site[1], target))
        for site in z_checks:
            control = neighbour(site, z_dir)
            if control is not None:
                pairs.append((control, site[0] * side + site[1]))
        cx_layers.append(_two_qubit_layer(pairs, "CX", n))

    hadamard_layer = _single_qubit_layer({r * side + c:"H" for r, c in x_checks}, n)
    layers = [hadamard_layer] + cx_layers + [hadamard_layer]
    metadata = {"family":"unrotated", "distance":distance}
    return Circuit(n, layers, constants.MEAS_RESET_TIME, False, metadata)


def build_toy_circuit(n:int = 1, tau:float = constants.TOY_TAU,
        gate_kind:str = "X") -> Circuit:
    """Builds the toy circuit: a single layer of n single-qubit Pauli
    gates with layer time 1 and measurement / reset time tau, so that
    times are measured in units of the layer time."""
    if n < 1:
        raise ValueError("The toy circuit needs at least one qubit.")
    if tau <= 0:
        raise ValueError("tau must be positive.")
    layer = Layer([CliffordGate(gate_kind, [q]) for q in range(n)], 1.0,
            "single_qubit")
    return Circuit(n, [layer], tau, False, {"family":"toy", "tau":tau})


def build_circuit(kind:str, distance:int, width:int = None) -> Circuit:
    """Builds a circuit of one of the supported families by name.

    Raises:
        ValueError: If the family is not recognized.
    """
    if kind == "rotated":
        return build_rotated_surface_circuit(distance, width)
    if kind == "unrotated":
        return build_unrotated_surface_circuit(distance)
    raise ValueError("Circuit kind must be one of 'rotated', 'unrotated'.")
