"""Exceptions raised by acesLab. RankDeficiencyError and SizeGuardError
are raised when a calculation cannot be completed; both are subclasses
of ValueError, so callers that catch ValueError (as for any other
invalid input) will also catch these. InputFileError is raised when an
input file cannot be parsed, and is an OSError like any other failure
to read an input."""


class RankDeficiencyError(ValueError):
    """Raised when the design matrix (or a normal matrix derived from it)
    does not have full column rank, so that some gate eigenvalues
    cannot be identified.

    Attributes:
        deficient_columns (list): Indices of the columns which could
            not be identified. May be empty if the columns could not
            be determined (e.g. on the sparse path).
    """

    def __init__(self, message, deficient_columns = None):
        super().__init__(message)
        if deficient_columns is None:
            deficient_columns = []
        self.deficient_columns = list(deficient_columns)


class SizeGuardError(ValueError):
    """Raised when a dense calculation would exceed its configured
    size limit. The caller should use a moment approximation or a
    sparse calculation instead."""


class InputFileError(OSError):
    """Raised when an input file is not valid JSON or lacks a field its
    format requires."""
