"""Calculates the covariance matrix Sigma of the gate eigenvalue
estimators for a design under known noise, for the ordinary, weighted
and generalised least squares estimators. With W the weight matrix of the
estimator, G = A^T W A the normal matrix and A+ = G^-1 A^T W,

    Sigma' = A+ Omega' A+^T,    Sigma = diag(lambda) Sigma' diag(lambda),

which for GLS (W = Omega'^-1) reduces to Sigma' = G^-1. Everything is
calculated at a measurement budget S = 1; Sigma scales as 1 / S.

Small problems use dense Cholesky factorisations of the normal matrix.
Large problems use a sparse LU factorisation and only ever need the
traces tr(Sigma) and tr(Sigma^2), which are accumulated in batches of
columns without forming Sigma."""
import numpy as np
from scipy import sparse
from scipy.linalg import cho_factor, cho_solve, LinAlgError
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from ..design_toolkit.covariance_model import CovarianceModel
from ..exceptions import RankDeficiencyError, SizeGuardError
from ..constants import constants


ESTIMATOR_KINDS = ("OLS", "WLS", "GLS")


def check_estimator_kind(estimator_kind:str) -> str:
    """Raises a ValueError if the estimator kind is not recognized."""
    if estimator_kind not in ESTIMATOR_KINDS:
        raise ValueError("estimator_kind must be one of 'OLS', 'WLS', 'GLS'.")
    return estimator_kind



class BlockCholeskySolver():
    """Applies the inverse of a block diagonal, sparse, positive definite
    matrix such as Omega'. Each diagonal block is split into its connected
    components; single-row components are inverted directly, components
    of up to constants.MAX_GLS_BLOCK_SIZE rows use a dense Cholesky
    factorisation and larger components a sparse LU factorisation.

    Attributes:
        num_rows (int): The size of the matrix.
        singletons (np.ndarray): Rows forming components of size one.
        singleton_inverse (np.ndarray): The inverse diagonal entry of
            each singleton row.
        components (list): Tuples (rows, kind, factor) for the other
            components, kind being "dense" or "sparse".
    """

    def __init__(self, blocks:list):
        self.num_rows = int(sum(b.shape[0] for b in blocks))
        singletons, singleton_diag = [], []
        self.components = []
        offset = 0
        for block in blocks:
            block = sparse.csr_matrix(block)
            ncomp, labels = connected_components(block, directed=False)
            order = np.argsort(labels, kind="stable")
            bounds = np.concatenate([[0], np.cumsum(np.bincount(labels, minlength=ncomp))])
            diag = block.diagonal()
            for c in range(ncomp):
                local = order[bounds[c]:bounds[c+1]]
                if local.shape[0] == 1:
                    singletons.append(local[0] + offset)
                    singleton_diag.append(diag[local[0]])
                    continue
                sub = block[local][:, local]
                if local.shape[0] <= constants.MAX_GLS_BLOCK_SIZE:
                    factor = cho_factor(sub.toarray())
                    self.components.append((local + offset, "dense", factor))
                else:
                    self.components.append((local + offset, "sparse",
                        splu(sub.tocsc())))
            offset += block.shape[0]
        self.singletons = np.array(singletons, dtype=np.int64)
        self.singleton_inverse = 1 / np.array(singleton_diag, dtype=np.float64)


    @staticmethod
    def _apply(kind, factor, rhs):
        if kind == "dense":
            return cho_solve(factor, rhs)
        return factor.solve(rhs)

    def solve(self, rhs:np.ndarray) -> np.ndarray:
        """Returns the inverse matrix applied to a dense (M,) or (M, k) array."""
        output = np.empty_like(rhs, dtype=np.float64)
        if self.singletons.shape[0] > 0:
            if rhs.ndim == 1:
                output[self.singletons] = rhs[self.singletons] * self.singleton_inverse
            else:
                output[self.singletons] = rhs[self.singletons] * \
                        self.singleton_inverse[:,None]
        for rows, kind, factor in self.components:
            output[rows] = self._apply(kind, factor, rhs[rows])
        return output

    def weighted_design(self, amat) -> sparse.csr_matrix:
        """Returns the inverse matrix applied to a sparse (M, N) matrix,
        as a sparse matrix. Each component only meets the columns its
        rows touch, so the solves stay small."""
        amat = sparse.csr_matrix(amat, dtype=np.float64)
        pieces = []
        if self.singletons.shape[0] > 0:
            scale = np.zeros(self.num_rows)
            scale[self.singletons] = self.singleton_inverse
            pieces.append(sparse.diags(scale) @ amat)
        for rows, kind, factor in self.components:
            sub = amat[rows]
            cols = np.unique(sub.indices)
            if cols.shape[0] == 0:
                continue
            solved = self._apply(kind, factor, sub[:, cols].toarray())
            local = sparse.coo_matrix(solved)
            pieces.append(sparse.csr_matrix((local.data,
                (rows[local.row], cols[local.col])), shape=amat.shape))
        if len(pieces) == 0:
            return sparse.csr_matrix(amat.shape)
        return sparse.csr_matrix(sum(pieces[1:], pieces[0]))



class GateCovariance():
    """The gate eigenvalue estimator covariance for a design, noise and
    estimator kind, at measurement budget S = 1.

    Attributes:
        design (ExperimentalDesign): The design.
        cov_model (CovarianceModel): The circuit eigenvalue covariance model.
        estimator_kind (str): One of "OLS", "WLS", "GLS".
        shot_weights (np.ndarray): The shot weights used.
        gate_eigenvalues (np.ndarray): The true gate eigenvalues.
        omega_prime (csr_matrix): Omega' for S = 1.
        amat (csr_matrix): The design matrix as floats.
        weighted (csr_matrix): W A.
        dense (bool): Whether the dense path is used.
    """

    def __init__(self, design, noise, estimator_kind:str = "WLS",
            shot_weights = None, cov_model:CovarianceModel = None):
        """Constructor.

        Args:
            design (ExperimentalDesign): The design.
            noise: A NoiseModel or gate eigenvalue vector. Ignored if
                cov_model is supplied.
            estimator_kind (str): One of "OLS", "WLS", "GLS".
            shot_weights: If supplied, used instead of the design's
                shot weights.
            cov_model (CovarianceModel): A prebuilt covariance model for
                this design, which the optimisers reuse.

        Raises:
            ValueError: If the estimator kind is invalid.
            RankDeficiencyError: If the normal matrix is singular.
        """
        self.estimator_kind = check_estimator_kind(estimator_kind)
        self.design = design
        if cov_model is None:
            cov_model = CovarianceModel(design, noise)
        self.cov_model = cov_model
        if shot_weights is None:
            shot_weights = design.shot_weights
        self.shot_weights = design.check_weights(shot_weights)
        self.gate_eigenvalues = cov_model.gate_eigenvalues
        self.omega_prime = cov_model.omega_prime(self.shot_weights)
        self.amat = sparse.csr_matrix(design.design_matrix, dtype=np.float64)
        self.num_cols = self.amat.shape[1]

        empty_cols = np.flatnonzero(np.diff(self.amat.tocsc().indptr) == 0)
        if empty_cols.shape[0] > 0:
            raise RankDeficiencyError("Some gate eigenvalues do not appear in "
                    "any circuit eigenvalue.", empty_cols.tolist())

        self._solver = None
        if estimator_kind == "OLS":
            self.weighted = self.amat
        elif estimator_kind == "WLS":
            self.weights = 1 / self.omega_prime.diagonal()
            self.weighted = sparse.diags(self.weights) @ self.amat
        else:
            self._solver = BlockCholeskySolver(
                    cov_model.omega_prime_blocks(self.shot_weights))
            self.weighted = self._solver.weighted_design(self.amat)
        self.weighted = sparse.csr_matrix(self.weighted)

        normal_mat = (self.amat.T @ self.weighted).tocsc()
        self.dense = self.num_cols <= constants.MAX_DENSE_MERIT_COLS
        if self.dense:
            normal_mat = normal_mat.toarray()
            normal_mat = 0.5 * (normal_mat + normal_mat.T)
            try:
                self._factor = cho_factor(normal_mat)
            except LinAlgError as err:
                raise self._rank_error() from err
            pivots = np.abs(np.diag(self._factor[0]))
            if pivots.min() < 1e-7 * pivots.max():
                raise self._rank_error()
        else:
            try:
                self._factor = splu(normal_mat)
            except RuntimeError as err:
                raise RankDeficiencyError("The normal matrix is singular.") from err


    def _rank_error(self) -> RankDeficiencyError:
        try:
            columns = self.design.check_rank()
        except SizeGuardError:
            columns = []
        return RankDeficiencyError("The normal matrix is singular; the design "
                "cannot identify every gate eigenvalue.", columns)

    def normal_solve(self, rhs:np.ndarray) -> np.ndarray:
        """Applies G^-1 to a dense array."""
        if self.dense:
            return cho_solve(self._factor, rhs)
        return self._factor.solve(rhs)

    def _require_dense(self):
        if not self.dense:
            raise SizeGuardError("This calculation needs the dense path; the "
                    "design has too many gate eigenvalues.")

    def pseudoinverse(self) -> np.ndarray:
        """The dense (N, M) matrix A+ = G^-1 A^T W."""
        self._require_dense()
        return self.normal_solve(self.weighted.T.toarray())

    def sigma_prime(self) -> np.ndarray:
        """The dense (N, N) log-eigenvalue covariance Sigma'."""
        self._require_dense()
        if self.estimator_kind == "GLS":
            sigma_p = cho_solve(self._factor, np.eye(self.num_cols))
        else:
            middle = (self.weighted.T @ self.omega_prime @ self.weighted).toarray()
            sigma_p = self.normal_solve(self.normal_solve(middle).T)
        return 0.5 * (sigma_p + sigma_p.T)

    def sigma(self) -> np.ndarray:
        """The dense (N, N) gate eigenvalue covariance Sigma."""
        lam = self.gate_eigenvalues
        return lam[:,None] * self.sigma_prime() * lam[None,:]

    def _sigma_prime_columns(self, columns:np.ndarray) -> np.ndarray:
        rhs = np.zeros((self.num_cols, columns.shape[0]))
        rhs[columns, np.arange(columns.shape[0])] = 1
        solved = self.normal_solve(rhs)
        if self.estimator_kind == "GLS":
            return solved
        middle = self.weighted.T @ (self.omega_prime @ (self.weighted @ solved))
        return self.normal_solve(middle)

    def traces(self, column_subset = None) -> tuple:
        """The traces tr(Sigma) and tr(Sigma^2), restricted to a subset of
        gate eigenvalues if supplied.

        Args:
            column_subset: An array of column indices, or None for all.

        Returns:
            trace_sigma (float): tr(P Sigma P).
            trace_sigma_sq (float): tr((P Sigma P)^2), the squared
                Frobenius norm of the restriction.
        """
        lam = self.gate_eigenvalues
        if column_subset is None:
            columns = np.arange(self.num_cols)
        else:
            columns = np.unique(np.asarray(column_subset, dtype=np.int64))
        if self.dense:
            sigma = self.sigma()[np.ix_(columns, columns)]
            return float(np.trace(sigma)), float((sigma**2).sum())

        trace_sigma, trace_sigma_sq = 0.0, 0.0
        for start in range(0, columns.shape[0], constants.SPARSE_MERIT_BATCH):
            batch = columns[start:start + constants.SPARSE_MERIT_BATCH]
            cols = self._sigma_prime_columns(batch)[columns]
            cols *= lam[columns,None] * lam[None,batch]
            trace_sigma += float(cols[start + np.arange(batch.shape[0]),
                np.arange(batch.shape[0])].sum())
            trace_sigma_sq += float((cols**2).sum())
        return trace_sigma, trace_sigma_sq


def gate_covariance(design, noise, estimator_kind:str = "WLS") -> np.ndarray:
    """The dense gate eigenvalue covariance matrix Sigma at S = 1.

    Raises:
        RankDeficiencyError: If the normal matrix is singular.
        SizeGuardError: If the design is too large for a dense Sigma.
    """
    return GateCovariance(design, noise, estimator_kind).sigma()
