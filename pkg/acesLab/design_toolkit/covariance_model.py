"""The circuit eigenvalue estimator covariance model. For a tuple T with
experiment budget S_T, the sample-average estimators of the circuit
eigenvalues Lambda_(T,a) have covariance

    Omega_(a,a) = (1 - Lambda_a^2) / (S_T E_a)
    Omega_(a,b) = E_ab (Lambda_(a+b) - Lambda_a Lambda_b) / (S_T E_a E_b),

where E_a counts the experiments measuring a and E_ab those measuring
both. Estimators of different tuples are independent, so Omega is block
diagonal over tuples. The log-eigenvalue covariance is approximated to
first order as Omega' = D^-1 Omega D^-1 with D = diag(Lambda).

Since S_T = S Gamma_T / |E_T|, each block scales as 1 / (S Gamma_T). The
model therefore stores each block at S Gamma_T = 1 and rescales on
request, which is what the shot weight optimisers need."""
import numpy as np
from scipy import sparse

from ..noise_toolkit.noise_model import NoiseModel


def circuit_eigenvalues(design, gate_eigenvalues) -> np.ndarray:
    """The circuit eigenvalues Lambda = exp(-A x) of every design row,
    for gate eigenvalues lambda = exp(-x)."""
    return np.exp(-(design.design_matrix @ _log_eigenvalues(gate_eigenvalues)))


def _log_eigenvalues(gate_eigenvalues) -> np.ndarray:
    gate_eigenvalues = np.asarray(gate_eigenvalues, dtype=np.float64)
    if np.any(gate_eigenvalues <= 0):
        raise ValueError("Gate eigenvalues must be positive.")
    return -np.log(gate_eigenvalues)


def _eigenvalue_vector(design, noise) -> np.ndarray:
    if isinstance(noise, NoiseModel):
        if noise.circuit.n != design.circuit.n:
            raise ValueError("The noise model was built for a different circuit.")
        noise = noise.gate_eigenvalues()
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != (design.num_cols,):
        raise ValueError("There must be one gate eigenvalue per design matrix column.")
    return noise



class CovarianceModel():
    """The covariance of the circuit eigenvalue estimators of a design
    under known noise.

    Attributes:
        design (ExperimentalDesign): The design.
        gate_eigenvalues (np.ndarray): The gate eigenvalues lambda.
        circuit_eigenvalues (np.ndarray): Lambda for each design row.
        unit_blocks (list): For each tuple, the sparse block of Omega
            for S Gamma_T = 1.
        unit_prime_blocks (list): The same for Omega'.
    """

    def __init__(self, design, noise):
        """Constructor.

        Args:
            design (ExperimentalDesign): The design.
            noise: A NoiseModel, or the gate eigenvalue vector in
                canonical column order.
        """
        self.design = design
        self.gate_eigenvalues = _eigenvalue_vector(design, noise)
        log_eigs = _log_eigenvalues(self.gate_eigenvalues)
        self.circuit_eigenvalues = np.exp(-(design.design_matrix @ log_eigs))

        self.unit_blocks, self.unit_prime_blocks = [], []
        for k, block in enumerate(design.blocks):
            start, end = design.row_offsets[k], design.row_offsets[k+1]
            lam = self.circuit_eigenvalues[start:end]
            counts = block.counts.astype(np.float64)
            num_exp = float(block.num_experiments)
            pair_rows, pair_counts, pair_matrix = block.pair_data()

            diag = num_exp * (1 - lam**2) / counts
            if pair_rows.shape[0] > 0:
                lam_pair = np.exp(-(pair_matrix @ log_eigs))
                first, second = pair_rows[:,0], pair_rows[:,1]
                offdiag = num_exp * pair_counts * (lam_pair - lam[first] * lam[second]) / \
                        (counts[first] * counts[second])
                rows = np.concatenate([np.arange(lam.shape[0]), first, second])
                cols = np.concatenate([np.arange(lam.shape[0]), second, first])
                data = np.concatenate([diag, offdiag, offdiag])
            else:
                rows = cols = np.arange(lam.shape[0])
                data = diag
            omega = sparse.csr_matrix((data, (rows, cols)),
                    shape=(lam.shape[0], lam.shape[0]))
            omega.eliminate_zeros()
            inv_lam = sparse.diags(1 / lam)
            self.unit_blocks.append(omega)
            self.unit_prime_blocks.append((inv_lam @ omega @ inv_lam).tocsr())


    def _scales(self, shot_weights, measurement_budget) -> np.ndarray:
        if shot_weights is None:
            shot_weights = self.design.shot_weights
        shot_weights = np.asarray(shot_weights, dtype=np.float64)
        if np.any(shot_weights <= 0):
            raise ValueError("Every tuple needs a positive shot weight for its "
                    "estimators to have finite variance.")
        if measurement_budget <= 0:
            raise ValueError("The measurement budget must be positive.")
        return 1 / (measurement_budget * shot_weights)

    def omega_blocks(self, shot_weights = None, measurement_budget:float = 1.0) -> list:
        scales = self._scales(shot_weights, measurement_budget)
        return [b * s for b, s in zip(self.unit_blocks, scales)]

    def omega_prime_blocks(self, shot_weights = None,
            measurement_budget:float = 1.0) -> list:
        scales = self._scales(shot_weights, measurement_budget)
        return [b * s for b, s in zip(self.unit_prime_blocks, scales)]

    def omega(self, shot_weights = None, measurement_budget:float = 1.0):
        """The full (M, M) sparse covariance matrix Omega."""
        return sparse.block_diag(self.omega_blocks(shot_weights,
            measurement_budget), format="csr")

    def omega_prime(self, shot_weights = None, measurement_budget:float = 1.0):
        """The full (M, M) sparse log-eigenvalue covariance matrix Omega'."""
        return sparse.block_diag(self.omega_prime_blocks(shot_weights,
            measurement_budget), format="csr")

    def omega_prime_diagonal(self, shot_weights = None,
            measurement_budget:float = 1.0) -> np.ndarray:
        return np.concatenate([b.diagonal() for b in
            self.omega_prime_blocks(shot_weights, measurement_budget)])

    def budgets(self, measurement_budget:float) -> dict:
        """The budgets associated with S for the design's shot weights."""
        return {"S":measurement_budget,
                "S_prime":measurement_budget * self.design.shots_ratio(),
                "time_factor":self.design.time_factor(),
                "per_experiment":self.design.experiment_budgets(measurement_budget)}


def covariance_matrix(design, noise, measurement_budget:float = 1.0) -> tuple:
    """Builds the covariance model of a design and evaluates Omega at a
    measurement budget.

    Returns:
        cov_model (CovarianceModel): The model, reusable for other
            budgets and shot weights.
        omega (csr_matrix): The (M, M) covariance matrix for S.
    """
    cov_model = CovarianceModel(design, noise)
    return cov_model, cov_model.omega(measurement_budget = measurement_budget)
