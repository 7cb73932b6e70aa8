"""The OutcomeDataset class, which holds the outcome counts of a simulated
(or measured) ACES run: the shots given to each experiment and, for each
design matrix row, the number of shots and +1 outcomes pooled over the
experiments measuring it.

On disk a dataset is a JSON header plus a raw binary file of
little-endian int64 values, written next to the header with the suffix
".counts.bin", laid out as

    plus_counts[num_rows], row_shots[num_rows], experiment_shots[num_experiments]

with rows in design matrix order and experiments in tuple order, then
packing order within each tuple."""
import csv
import json
import os

import numpy as np

from ..constants import constants


#Byte order and width of the binary count file.
COUNT_DTYPE = np.dtype("<i8")



class OutcomeDataset():
    """Outcome counts for every experiment and design matrix row.

    Attributes:
        plus_counts (np.ndarray): The number of +1 outcomes of each row.
        row_shots (np.ndarray): The number of shots measuring each row.
        experiment_shots (np.ndarray): The shots given to each experiment.
        experiment_offsets (np.ndarray): The index of the first experiment
            of each tuple, with the total appended.
        metadata (dict): Provenance: seed, mode, measurement budget,
            S_prime, shots lost to rounding and the noise model generator.
    """

    def __init__(self, plus_counts, row_shots, experiment_shots,
            experiment_offsets, metadata:dict = None):
        """Constructor.

        Raises:
            ValueError: If the arrays are inconsistent or a row has more
                +1 outcomes than shots.
        """
        self.plus_counts = np.asarray(plus_counts, dtype=np.int64)
        self.row_shots = np.asarray(row_shots, dtype=np.int64)
        self.experiment_shots = np.asarray(experiment_shots, dtype=np.int64)
        self.experiment_offsets = np.asarray(experiment_offsets, dtype=np.int64)
        if self.plus_counts.shape != self.row_shots.shape or self.plus_counts.ndim != 1:
            raise ValueError("There must be one +1 count and one shot count per row.")
        if np.any(self.plus_counts < 0) or np.any(self.plus_counts > self.row_shots):
            raise ValueError("Row counts must lie between 0 and the row shots.")
        if np.any(self.experiment_shots < 0):
            raise ValueError("Experiment shots must be non-negative.")
        if self.experiment_offsets[-1] != self.experiment_shots.shape[0]:
            raise ValueError("The experiment offsets do not match the experiment shots.")
        self.metadata = dict(metadata) if metadata is not None else {}


    @property
    def num_rows(self) -> int:
        return self.plus_counts.shape[0]

    @property
    def num_experiments(self) -> int:
        return self.experiment_shots.shape[0]

    def total_shots(self) -> int:
        return int(self.experiment_shots.sum())

    def uncovered_rows(self) -> np.ndarray:
        """Rows no shot has measured."""
        return np.flatnonzero(self.row_shots == 0)

    def check_design(self, design):
        """Raises a ValueError if the dataset does not belong to the design."""
        if self.num_rows != design.num_rows or \
                self.num_experiments != design.num_experiments():
            raise ValueError("The dataset does not match the design.")

    def merge(self, other):
        """Pools two datasets for the same design by adding their counts."""
        if self.num_rows != other.num_rows or \
                not np.array_equal(self.experiment_offsets, other.experiment_offsets):
            raise ValueError("Only datasets for the same design can be merged.")
        return OutcomeDataset(self.plus_counts + other.plus_counts,
                self.row_shots + other.row_shots,
                self.experiment_shots + other.experiment_shots,
                self.experiment_offsets, self.metadata)

    def header(self) -> dict:
        return {"format":"outcome_dataset", "version":constants.FORMAT_VERSION,
                "num_rows":self.num_rows, "num_experiments":self.num_experiments,
                "experiment_offsets":self.experiment_offsets.tolist(),
                "dtype":"int64", "byte_order":"little",
                "layout":["plus_counts", "row_shots", "experiment_shots"],
                "metadata":self.metadata}

    def save(self, filepath:str):
        """Writes the JSON header to filepath and the counts to
        filepath + '.counts.bin'."""
        dirname = os.path.dirname(filepath)
        if dirname:
            os.makedirs(dirname, exist_ok=True)
        header = self.header()
        header["binary_file"] = os.path.basename(filepath) + ".counts.bin"
        np.concatenate([self.plus_counts, self.row_shots,
            self.experiment_shots]).astype(COUNT_DTYPE).tofile(filepath + ".counts.bin")
        with open(filepath, "w", encoding="utf-8") as fhandle:
            json.dump(header, fhandle, indent=1)

    @classmethod
    def load(cls, filepath:str):
        """Reads a dataset written by save.

        Raises:
            ValueError: If the header is not an outcome dataset or the
                binary file has the wrong length.
        """
        with open(filepath, "r", encoding="utf-8") as fhandle:
            header = json.load(fhandle)
        if header.get("format") != "outcome_dataset":
            raise ValueError("The document does not describe an outcome dataset.")
        binary_file = os.path.join(os.path.dirname(filepath),
                header.get("binary_file", os.path.basename(filepath) + ".counts.bin"))
        values = np.fromfile(binary_file, dtype=COUNT_DTYPE).astype(np.int64)
        num_rows, num_experiments = header["num_rows"], header["num_experiments"]
        if values.shape[0] != 2 * num_rows + num_experiments:
            raise ValueError("The count file does not match its header.")
        return cls(values[:num_rows], values[num_rows:2*num_rows],
                values[2*num_rows:], header["experiment_offsets"],
                header.get("metadata"))

    def to_csv(self, filepath:str, design = None):
        """Writes one line per row: row, tuple, pauli, plus_count, shots.
        The tuple and Pauli are only filled in if the design is supplied."""
        with open(filepath, "w", newline="", encoding="utf-8") as fhandle:
            writer = csv.writer(fhandle)
            writer.writerow(["row", "tuple", "pauli", "plus_count", "shots"])
            labels = [("", "")] * self.num_rows
            if design is not None:
                self.check_design(design)
                labels = [(str(block.layer_tuple), pauli.label())
                        for block in design.blocks for pauli in block.paulis]
            for row in range(self.num_rows):
                writer.writerow([row, labels[row][0], labels[row][1],
                    int(self.plus_counts[row]), int(self.row_shots[row])])
