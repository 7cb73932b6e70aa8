"""Estimation of circuit eigenvalues from outcome counts. Each row's
estimate is the sample mean of its +/-1 outcomes, pooled over every
experiment measuring the row, so experiments contribute in proportion
to their shots."""
import numpy as np



class CircuitEigenvalueEstimates():
    """Circuit eigenvalue estimates for the rows of a design.

    Attributes:
        estimates (np.ndarray): The estimates, in [-1, 1]; NaN for rows
            without shots.
        variances (np.ndarray): The estimated variance of each estimate,
            (1 - estimate^2) / shots with 1 - estimate^2 floored at 1 / shots;
            NaN for rows without shots.
        row_shots (np.ndarray): The shots measuring each row.
        valid (np.ndarray): Whether each row has at least one shot.
    """

    def __init__(self, estimates, row_shots):
        self.estimates = np.asarray(estimates, dtype=np.float64)
        self.row_shots = np.asarray(row_shots, dtype=np.int64)
        self.valid = self.row_shots > 0
        self.variances = np.full(self.estimates.shape, np.nan)
        shots = self.row_shots[self.valid].astype(np.float64)
        spread = np.maximum(1 - self.estimates[self.valid]**2, 1 / shots)
        self.variances[self.valid] = spread / shots


    @property
    def num_rows(self) -> int:
        return self.estimates.shape[0]

    def floors(self) -> np.ndarray:
        """The floor 1 / (2 shots) below which an estimate is clipped
        before taking logarithms."""
        floors = np.full(self.num_rows, np.nan)
        floors[self.valid] = 0.5 / self.row_shots[self.valid]
        return floors

    def clipped(self) -> tuple:
        """The valid estimates clipped to [1 / (2 shots), 1].

        Returns:
            clipped (np.ndarray): The clipped estimates; NaN for rows
                without shots.
            was_clipped (np.ndarray): Whether each row was raised to its floor.
        """
        floors = self.floors()
        clipped = np.full(self.num_rows, np.nan)
        clipped[self.valid] = np.clip(self.estimates[self.valid],
                floors[self.valid], 1.0)
        was_clipped = np.zeros(self.num_rows, dtype=bool)
        was_clipped[self.valid] = self.estimates[self.valid] < floors[self.valid]
        return clipped, was_clipped


def estimate_circuit_eigenvalues(dataset, design = None) -> CircuitEigenvalueEstimates:
    """Estimates the circuit eigenvalue of every row of a dataset as
    2 (+1 count) / shots - 1.

    Args:
        dataset (OutcomeDataset): The outcome counts.
        design (ExperimentalDesign): If supplied, the dataset is checked
            against it.

    Returns:
        estimates (CircuitEigenvalueEstimates): The estimates. Rows without
            shots are marked invalid, to be left out of the fit.
    """
    if design is not None:
        dataset.check_design(design)
    estimates = np.full(dataset.num_rows, np.nan)
    valid = dataset.row_shots > 0
    estimates[valid] = 2 * dataset.plus_counts[valid] / dataset.row_shots[valid] - 1
    return CircuitEigenvalueEstimates(estimates, dataset.row_shots)
