"""The OptimiserConfig class, which holds the hyperparameters shared by
the shot weight, repetition and tuple set optimisers."""
from ..constants import constants


#Parameters that must be integers of at least 1 (l_set may also be None).
_INTEGER_PARAMS = ("n_ex", "l_ex", "f_trial", "max_steps", "trial_max_steps",
        "tol_window", "revert_window", "revert_limit", "max_repetition")



class OptimiserConfig():
    """Hyperparameters for design optimisation. Defaults are taken from
    constants.default_optimiser_params.

    Attributes:
        eta (float): The learning rate of the shot weight optimiser.
        mu (float): Its momentum, in [0, 1].
        eta_r (float): The factor by which eta is divided after repeated
            reverted steps.
        n_ex (int): The number of excursions of the tuple set optimiser.
        l_ex (int): The excursion length.
        l_set (int): The target tuple set size; None means five times the
            number of unique layers.
        f_trial (int): Trials allowed per tuple to be added.
        max_steps (int): The step cap of the final shot weight optimisation.
        trial_max_steps (int): The step cap used when evaluating candidate
            tuple sets.
        rel_tol (float): Relative improvement in F below which shot weight
            descent stops, measured over tol_window steps.
        tol_window (int): See rel_tol.
        revert_window (int): The window in which revert_limit reverted
            steps trigger a learning rate reduction.
        revert_limit (int): See revert_window.
        max_repetition (int): The largest repetition number tried.
        seed (int): The seed for tuple sampling.
    """

    def __init__(self, **kwargs):
        """Constructor.

        Raises:
            ValueError: If a key is not recognized or a value is invalid.
        """
        params = constants.default_optimiser_params.copy()
        for key in kwargs:
            if key not in params:
                raise ValueError(f"Unrecognized optimiser parameter {key}.")
        params.update(kwargs)
        self.eta = params["eta"]
        self.mu = params["mu"]
        self.eta_r = params["eta_r"]
        for key in _INTEGER_PARAMS:
            setattr(self, key, self._check_integer(key, params[key]))
        self.l_set = params["l_set"]
        self.rel_tol = params["rel_tol"]
        self.seed = int(params["seed"])


    @staticmethod
    def _check_integer(key:str, value) -> int:
        if int(value) != value or value < 1:
            raise ValueError(f"{key} must be an integer >= 1.")
        return int(value)

    @property
    def eta(self):
        """Property definition for the eta attribute."""
        return self._eta

    @eta.setter
    def eta(self, value):
        """Setter for the eta attribute."""
        if value <= 0:
            raise ValueError("eta must be positive.")
        self._eta = float(value)

    @property
    def mu(self):
        """Property definition for the mu attribute."""
        return self._mu

    @mu.setter
    def mu(self, value):
        """Setter for the mu attribute."""
        if not 0 <= value <= 1:
            raise ValueError("mu must lie in [0, 1].")
        self._mu = float(value)

    @property
    def eta_r(self):
        """Property definition for the eta_r attribute."""
        return self._eta_r

    @eta_r.setter
    def eta_r(self, value):
        """Setter for the eta_r attribute."""
        if value <= 0:
            raise ValueError("eta_r must be positive.")
        self._eta_r = float(value)

    @property
    def l_set(self):
        """Property definition for the l_set attribute."""
        return self._l_set

    @l_set.setter
    def l_set(self, value):
        """Setter for the l_set attribute. None means that the size is
        set from the circuit."""
        if value is not None:
            value = self._check_integer("l_set", value)
        self._l_set = value

    @property
    def rel_tol(self):
        """Property definition for the rel_tol attribute."""
        return self._rel_tol

    @rel_tol.setter
    def rel_tol(self, value):
        """Setter for the rel_tol attribute."""
        if value < 0:
            raise ValueError("rel_tol must be non-negative.")
        self._rel_tol = float(value)

    def target_set_size(self, circuit) -> int:
        """l_set, or five times the number of unique layers if unset."""
        if self.l_set is None:
            return 5 * circuit.num_unique
        return self.l_set

    def to_dict(self) -> dict:
        output = {key:getattr(self, key) for key in constants.default_optimiser_params}
        return output
