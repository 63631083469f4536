"""Exception types shared across the package."""


class BandedVarError(Exception):
    """Base class for all package-specific failures."""


class SingularDesignError(BandedVarError):
    """A regression design is numerically rank deficient.

    Attributes
    ----------
    column : int or None
        Index of the first offending design column.
    row : int or None
        Equation index when the failure occurred inside a row-wise fit.
    rows : list of int or None
        All failing equations, for aggregate fits.
    """

    def __init__(self, message, column=None, row=None, rows=None):
        super().__init__(message)
        self.column = column
        self.row = row
        self.rows = rows


class ConvergenceError(BandedVarError):
    """An iterative numerical routine failed to converge.

    Attributes
    ----------
    last_estimate : float or None
        Value of the quantity being computed at the final iteration.
    gap : float or None
        Remaining change between the last two iterates.
    """

    def __init__(self, message, last_estimate=None, gap=None):
        super().__init__(message)
        self.last_estimate = last_estimate
        self.gap = gap


class NonStationaryError(BandedVarError):
    """An operation that requires a stationary model received one that is not."""


class DataFormatError(BandedVarError):
    """Malformed input file. Carries the offending 1-based line number."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line
