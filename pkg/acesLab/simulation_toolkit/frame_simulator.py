"""Monte Carlo simulation of ACES experiments by Pauli frame propagation.

Each shot carries a Pauli frame, the accumulated error relative to the
ideal circuit. Frames are bit-sliced: the X and Z parts of qubit q are
stored as rows of uint64 words, 64 shots per word, so that conjugating
every shot through a Clifford gate is a handful of XORs on whole rows.
Before each gate an error is drawn from the gate's channel and
multiplied into the frame; at the end, a measured qubit's outcome is
flipped when the frame anticommutes with its measurement basis, and then
flipped again with the SPAM error probability of that qubit and basis.

The outcome of a row is the parity of the measured bits over the support
of its measured Pauli, corrected by the sign of that Pauli and by the
random signs of the prepared eigenstates. The corrections cancel the
ideal outcome exactly, so the corrected outcome of a shot is +1 precisely
when the flips over that support have even parity; this is what is
counted.

Random numbers come from Philox generators keyed by (seed, tuple,
experiment, shot block), so results do not depend on the order in which
experiments or shot blocks run."""
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .outcome_dataset import OutcomeDataset
from ..design_toolkit.covariance_model import circuit_eigenvalues
from ..design_toolkit.propagation import CODE_TO_BASIS
from ..noise_toolkit.noise_model import NoiseModel
from ..pauli_toolkit.clifford_gates import CONJUGATION_TABLES
from ..pauli_toolkit.pauli_strings import local_index, local_codes
from ..constants import constants


SIMULATION_MODES = ("frame", "independent")

#Frame words are little-endian so that bit k of word w is shot 64 w + k.
COUNT_WORD = np.dtype("<u8")


def _symplectic_map(image_index) -> list:
    """The action of a gate on frame bits, from its conjugation table.
    Slot 2k is the X bit and slot 2k + 1 the Z bit of gate qubit k. Returns
    for each output slot the input slots XORed into it, or None if the gate
    leaves every frame unchanged."""
    arity = (len(image_index).bit_length() - 1) // 2
    outputs = [[] for _ in range(2 * arity)]
    for k in range(arity):
        for part, code in ((0, 2), (1, 1)):
            codes = [0] * arity
            codes[k] = code
            image = local_codes(int(image_index[local_index(codes)]), arity)
            for m, image_code in enumerate(image):
                if image_code >> 1:
                    outputs[2*m].append(2*k + part)
                if image_code & 1:
                    outputs[2*m + 1].append(2*k + part)
    if all(sources == [slot] for slot, sources in enumerate(outputs)):
        return None
    return outputs


SYMPLECTIC_MAPS = {kind:_symplectic_map(table[0])
        for kind, table in CONJUGATION_TABLES.items()}


def _xor_positions(words:np.ndarray, positions:np.ndarray):
    """Flips the bits at the given shot positions of a row of words."""
    if positions.shape[0] == 0:
        return
    masks = np.left_shift(np.uint64(1), (positions & 63).astype(np.uint64))
    np.bitwise_xor.at(words, positions >> 6, masks)


def _popcount(words:np.ndarray) -> int:
    return int(np.unpackbits(words.astype(COUNT_WORD).view(np.uint8)).sum())


def shot_rng(seed:int, tuple_number:int, experiment_number:int, block:int):
    """The counter-based generator for one shot block of one experiment."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(
        [int(seed), int(tuple_number), int(experiment_number), int(block)])))



class FrameSimulator():
    """Simulates the experiments of a design under a Pauli noise model.

    Attributes:
        design (ExperimentalDesign): The design.
        noise (NoiseModel): The noise model.
        layer_tables (list): For each unique layer, a list of
            (qubits, error probabilities, symplectic map) per gate.
    """

    def __init__(self, design, noise:NoiseModel):
        """Constructor.

        Raises:
            ValueError: If the noise model is not a NoiseModel for the
                design's circuit.
        """
        if not isinstance(noise, NoiseModel):
            raise ValueError("Frame simulation needs a NoiseModel, not an "
                    "eigenvalue vector.")
        if noise.circuit.n != design.circuit.n or \
                noise.circuit.num_unique != design.circuit.num_unique:
            raise ValueError("The noise model was built for a different circuit.")
        self.design = design
        self.noise = noise
        self.layer_tables = []
        for uid, layer in enumerate(design.circuit.unique_layers):
            table = []
            for j, gate in enumerate(layer.gates):
                probs = noise.channel((uid, j)).probabilities
                table.append((gate.qubits, probs, SYMPLECTIC_MAPS[gate.kind]))
            self.layer_tables.append(table)


    @staticmethod
    def _inject_errors(frame_x, frame_z, qubits, probs, shots:int, rng):
        error_prob = 1 - probs[0]
        if error_prob <= 0:
            return
        num_errors = rng.binomial(shots, min(error_prob, 1.0))
        if num_errors == 0:
            return
        positions = rng.choice(shots, num_errors, replace=False).astype(np.int64)
        weights = probs[1:] / probs[1:].sum()
        errors = rng.choice(np.arange(1, probs.shape[0]), size=num_errors, p=weights)
        arity = len(qubits)
        for k, qubit in enumerate(qubits):
            x_bits = (errors >> (2 * arity - 1 - k)) & 1
            z_bits = (errors >> (arity - 1 - k)) & 1
            _xor_positions(frame_x[qubit], positions[x_bits == 1])
            _xor_positions(frame_z[qubit], positions[z_bits == 1])

    @staticmethod
    def _apply_gate(frame_x, frame_z, qubits, outputs):
        inputs = []
        for qubit in qubits:
            inputs += [frame_x[qubit].copy(), frame_z[qubit].copy()]
        for slot, sources in enumerate(outputs):
            word = np.zeros_like(inputs[0])
            for source in sources:
                word ^= inputs[source]
            if slot % 2 == 0:
                frame_x[qubits[slot // 2]] = word
            else:
                frame_z[qubits[slot // 2]] = word

    def _simulate_block(self, layer_tuple, meas:dict, members, block, shots:int,
            rng) -> np.ndarray:
        num_words = -(-shots // 64)
        n = self.design.circuit.n
        frame_x = np.zeros((n, num_words), dtype=COUNT_WORD)
        frame_z = np.zeros((n, num_words), dtype=COUNT_WORD)
        for uid in layer_tuple:
            for qubits, probs, outputs in self.layer_tables[uid]:
                self._inject_errors(frame_x, frame_z, qubits, probs, shots, rng)
                if outputs is not None:
                    self._apply_gate(frame_x, frame_z, qubits, outputs)

        flips = {}
        for qubit in sorted(meas):
            code = meas[qubit]
            flip = np.zeros(num_words, dtype=COUNT_WORD)
            if code & 1:
                flip ^= frame_x[qubit]
            if code >> 1:
                flip ^= frame_z[qubit]
            p_meas = self.noise.channel(("meas", qubit, CODE_TO_BASIS[code])).probabilities[1]
            if p_meas > 0:
                num_flips = rng.binomial(shots, p_meas)
                _xor_positions(flip, rng.choice(shots, num_flips,
                    replace=False).astype(np.int64))
            flips[qubit] = flip

        plus_counts = np.zeros(len(members), dtype=np.int64)
        for k, member in enumerate(members):
            parity = np.zeros(num_words, dtype=COUNT_WORD)
            for qubit in block.measured[member]:
                parity ^= flips[qubit]
            plus_counts[k] = shots - _popcount(parity)
        return plus_counts

    def simulate_experiment(self, tuple_number:int, experiment_number:int,
            shots:int, seed:int) -> np.ndarray:
        """Simulates one experiment of one tuple.

        Args:
            tuple_number (int): The index of the tuple in the design.
            experiment_number (int): The index of the experiment within
                the tuple's experiment set.
            shots (int): The number of shots.
            seed (int): The simulation seed.

        Returns:
            plus_counts (np.ndarray): The number of +1 outcomes for each
                member of the experiment, in the order of its members.

        Raises:
            ValueError: If shots is not positive or an index is invalid.
        """
        if int(shots) != shots or shots <= 0:
            raise ValueError("The number of shots must be a positive integer.")
        block = self.design.blocks[tuple_number]
        if experiment_number < 0 or experiment_number >= block.num_experiments:
            raise ValueError("The experiment does not belong to this tuple.")
        experiment = block.experiments[experiment_number]
        plus_counts = np.zeros(len(experiment.members), dtype=np.int64)
        for number, start in enumerate(range(0, int(shots), constants.SHOT_BLOCK_SIZE)):
            block_shots = min(constants.SHOT_BLOCK_SIZE, int(shots) - start)
            rng = shot_rng(seed, tuple_number, experiment_number, number)
            plus_counts += self._simulate_block(block.layer_tuple, experiment.meas,
                    experiment.members, block, block_shots, rng)
        return plus_counts



def _experiment_offsets(design) -> np.ndarray:
    return np.cumsum([0] + [block.num_experiments for block in design.blocks])


def simulate_experiment(design, noise:NoiseModel, tuple_number:int,
        experiment_number:int, shots:int, seed:int) -> np.ndarray:
    """Simulates one experiment of a design; see FrameSimulator.simulate_experiment."""
    return FrameSimulator(design, noise).simulate_experiment(tuple_number,
            experiment_number, shots, seed)


def simulate_design(design, noise:NoiseModel, measurement_budget:float,
        seed:int, mode:str = "frame", threads:int = 1,
        verbose:bool = False) -> OutcomeDataset:
    """Simulates every experiment of a design for a measurement budget.

    Args:
        design (ExperimentalDesign): The design.
        noise (NoiseModel): The noise model.
        measurement_budget (float): The total number of shots S, divided
            among experiments by design.shot_allocation.
        seed (int): The simulation seed.
        mode (str): "frame" for Pauli frame simulation, or "independent"
            to draw each row as an independent binomial with the exact
            circuit eigenvalue, which ignores correlations between rows.
        threads (int): The number of worker threads for frame simulation.
        verbose (bool): If True, prints progress for each tuple.

    Returns:
        dataset (OutcomeDataset): The outcome counts.

    Raises:
        ValueError: If the budget, mode or thread count is invalid.
    """
    if mode not in SIMULATION_MODES:
        raise ValueError("mode must be one of 'frame', 'independent'.")
    if threads < 1:
        raise ValueError("threads must be at least 1.")
    allocation = design.shot_allocation(measurement_budget)
    per_experiment = allocation["per_experiment"]
    offsets = _experiment_offsets(design)
    experiment_shots = np.repeat(per_experiment,
            [block.num_experiments for block in design.blocks])
    row_shots = design.row_counts * np.repeat(per_experiment,
            [block.num_rows for block in design.blocks])
    plus_counts = np.zeros(design.num_rows, dtype=np.int64)

    if mode == "independent":
        eigenvalues = noise.gate_eigenvalues() if isinstance(noise, NoiseModel) else noise
        lambdas = circuit_eigenvalues(design, eigenvalues)
        for k in range(len(design.blocks)):
            rows = slice(design.row_offsets[k], design.row_offsets[k+1])
            rng = shot_rng(seed, k, 0, 0)
            plus_counts[rows] = rng.binomial(row_shots[rows],
                    np.clip((1 + lambdas[rows]) / 2, 0, 1))
    else:
        simulator = FrameSimulator(design, noise)
        jobs = [(k, e) for k, block in enumerate(design.blocks)
                for e in range(block.num_experiments) if per_experiment[k] > 0]

        def run(job):
            return simulator.simulate_experiment(job[0], job[1],
                    int(per_experiment[job[0]]), seed)

        if threads == 1:
            results = [run(job) for job in jobs]
        else:
            with ThreadPoolExecutor(max_workers=threads) as executor:
                results = list(executor.map(run, jobs))
        current_tuple = None
        for (k, e), counts in zip(jobs, results):
            members = np.array(design.blocks[k].experiments[e].members, dtype=np.int64)
            plus_counts[design.row_offsets[k] + members] += counts
            if verbose and k != current_tuple:
                current_tuple = k
                print(f"Simulating tuple {k} of {len(design.blocks)}")

    metadata = {"seed":int(seed), "mode":mode,
            "measurement_budget":float(measurement_budget),
            "S_prime":float(allocation["S_prime"]), "lost":float(allocation["lost"])}
    if isinstance(noise, NoiseModel):
        metadata["noise"] = {"generator":noise.generator, "params":noise.params,
                "seed":noise.seed}
    return OutcomeDataset(plus_counts, row_shots, experiment_shots, offsets, metadata)
