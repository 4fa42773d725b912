"""Exception hierarchy shared by all modules."""


class CovStructError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(CovStructError, ValueError):
    pass


class DomainError(CovStructError, ValueError):
    """Parameter out of range or unsupported structure/domain combination."""


class NotPSDError(CovStructError, ValueError):
    pass


class NumericError(CovStructError, ArithmeticError):
    pass


class SingularityError(NumericError):
    """A transform or Jacobian is evaluated at a point where it is undefined."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DegenerateDenominatorError(NumericError):
    """A superdiagonal used as a ratio denominator is identically zero.

    The AR test based on neighbouring-diagonal ratios treats this as evidence
    against the null; the test runner converts it into a forced rejection.
    """


class DegenerateError(NumericError):
    """Zero trace, all-zero eigenvalues, or zero variances."""


class SampleSizeError(CovStructError, ValueError):
    pass


class ParseError(CovStructError, ValueError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column
