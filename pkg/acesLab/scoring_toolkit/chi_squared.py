"""The distribution of the normalised RMS error of the gate eigenvalue
estimator. To second order the squared error ||lambda_hat - lambda||^2 is
a generalised chi-squared variable sum_v sigma_v y_v, with sigma_v the
eigenvalues of Sigma and y_v independent chi-squared variables with one
degree of freedom. The normalised RMS error is sqrt(S'/N) times its root.

Two evaluation methods are provided: seeded Monte Carlo sampling (the
default) and numerical inversion of the characteristic function by
Imhof's formula."""
import numpy as np
from scipy import stats
from scipy.integrate import quad
from scipy.optimize import brentq

from ..exceptions import SizeGuardError
from ..constants import constants



class NRMSEDistribution():
    """The distribution of R = sqrt(sum_v w_v y_v), with w_v the
    eigenvalues of Sigma scaled by S'/N.

    Attributes:
        weights (np.ndarray): The non-negative weights w_v.
        method (str): One of "monte_carlo", "imhof".
        samples (np.ndarray): Sorted Monte Carlo samples of R, or None.
        mean (float): The mean of R.
        sd (float): The standard deviation of R.
    """

    def __init__(self, weights, method:str = "monte_carlo",
            num_draws:int = constants.MIN_DISTRIBUTION_DRAWS, seed:int = 0):
        """Constructor.

        Raises:
            ValueError: If the method is unknown or the weights are invalid.
        """
        weights = np.asarray(weights, dtype=np.float64)
        if weights.ndim != 1 or weights.shape[0] == 0 or not np.all(np.isfinite(weights)):
            raise ValueError("The weights must be a non-empty finite vector.")
        self.weights = np.clip(weights, 0, None)
        if self.weights.sum() <= 0:
            raise ValueError("At least one weight must be positive.")
        self.method = method
        self.samples = None
        if method == "monte_carlo":
            self.samples = np.sort(self._draw(num_draws, seed))
            self.mean = float(self.samples.mean())
            self.sd = float(self.samples.std(ddof=1))
        elif method == "imhof":
            upper = self._upper_bound()
            self.mean = float(quad(lambda r: 1 - self.cdf(r), 0, upper, limit=200)[0])
            second_moment = float(self.weights.sum())
            self.sd = float(np.sqrt(max(second_moment - self.mean**2, 0)))
        else:
            raise ValueError("method must be one of 'monte_carlo', 'imhof'.")


    def _draw(self, num_draws:int, seed:int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        samples = np.empty(num_draws)
        for start in range(0, num_draws, constants.DISTRIBUTION_CHUNK):
            end = min(start + constants.DISTRIBUTION_CHUNK, num_draws)
            normals = rng.standard_normal((end - start, self.weights.shape[0]))
            samples[start:end] = np.sqrt((normals**2) @ self.weights)
        return samples

    def _upper_bound(self) -> float:
        """A value of R beyond which the survival probability is negligible."""
        mean_q = self.weights.sum()
        sd_q = np.sqrt(2 * (self.weights**2).sum())
        return float(np.sqrt(mean_q + 40 * sd_q + 40 * self.weights.max()))

    def _imhof_survival(self, q:float) -> float:
        """P(Q > q) for Q = sum_v w_v y_v."""
        weights = self.weights[self.weights > 0]

        def integrand(u):
            if u == 0:
                return 0.5 * (weights.sum() - q)
            theta = 0.5 * np.arctan(weights * u).sum() - 0.5 * q * u
            rho = np.exp(0.25 * np.log1p((weights * u)**2).sum())
            return np.sin(theta) / (u * rho)

        integral = quad(integrand, 0, np.inf, limit=500)[0]
        return float(np.clip(0.5 + integral / np.pi, 0, 1))

    def cdf(self, r) -> float:
        """P(R <= r)."""
        if r <= 0:
            return 0.0
        if self.samples is not None:
            return float(np.searchsorted(self.samples, r, side="right") /
                    self.samples.shape[0])
        return 1 - self._imhof_survival(r**2)

    def pdf(self, r, step:float = None) -> float:
        """The density of R. Monte Carlo distributions use a Gaussian
        kernel density estimate; otherwise the CDF is differentiated
        numerically."""
        if self.samples is not None:
            return float(stats.gaussian_kde(self.samples)(r)[0])
        if step is None:
            step = 1e-4 * max(self.sd, 1e-12)
        low = max(r - step, 0)
        return (self.cdf(r + step) - self.cdf(low)) / (r + step - low)

    def quantile(self, prob:float) -> float:
        """The value r with P(R <= r) = prob."""
        if not 0 < prob < 1:
            raise ValueError("prob must lie in (0, 1).")
        if self.samples is not None:
            return float(np.quantile(self.samples, prob))
        return float(brentq(lambda r: self.cdf(r) - prob, 0, self._upper_bound(),
            xtol=1e-12 * self._upper_bound()))

    def to_dict(self) -> dict:
        return {"method":self.method, "mean":self.mean, "sd":self.sd,
                "quantiles":{str(p):self.quantile(p) for p in (0.05, 0.5, 0.95)}}


def nrmse_distribution(sigma:np.ndarray, shots_ratio:float = 1.0,
        method:str = "monte_carlo", num_draws:int = constants.MIN_DISTRIBUTION_DRAWS,
        seed:int = 0) -> NRMSEDistribution:
    """The distribution of the normalised RMS error for a gate eigenvalue
    covariance matrix.

    Args:
        sigma (np.ndarray): The (N, N) covariance Sigma at S = 1.
        shots_ratio (float): S' / S, or 1 without time accounting.
        method (str): One of "monte_carlo", "imhof".
        num_draws (int): The number of Monte Carlo draws.
        seed (int): The Monte Carlo seed.

    Returns:
        distribution (NRMSEDistribution): The distribution.

    Raises:
        SizeGuardError: If N exceeds constants.MAX_DISTRIBUTION_COLS; use
            merit_calcs.merit for the moment approximation instead.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError("Sigma must be a square matrix.")
    if sigma.shape[0] > constants.MAX_DISTRIBUTION_COLS:
        raise SizeGuardError("Sigma is too large for an eigendecomposition; "
                "use the moment approximation of the figure of merit.")
    if num_draws < 1:
        raise ValueError("num_draws must be positive.")
    eigenvalues = np.linalg.eigvalsh(0.5 * (sigma + sigma.T))
    return NRMSEDistribution(eigenvalues * shots_ratio / sigma.shape[0], method,
            num_draws, seed)
