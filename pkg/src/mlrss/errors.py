"""Exception hierarchy.

Errors split into two families so the CLI can map them to exit codes:
``DataError`` for bad or inconsistent input and ``NumericalError`` for
fits and evaluations that cannot produce a finite answer.
"""


class MlrssError(Exception):
    """Base class for all package errors."""


class DataError(MlrssError):
    pass


class NumericalError(MlrssError):
    pass


class DegenerateResponse(DataError):
    """Counts carry no information for the requested fit (e.g. all zeros)."""


class OutOfOrderDay(DataError):
    pass


class RangeMismatch(DataError):
    pass


class IndexOutOfRange(DataError):
    pass


class SingularDesign(NumericalError):
    """The weighted normal system of an IRLS step is rank deficient."""


class Overflow(NumericalError):
    pass


class FitFailed(NumericalError):
    pass


class EmptyBank(NumericalError):
    pass


class NonpositiveLambda(DataError):
    pass


class NotConvergedWarning(RuntimeWarning):
    """IRLS hit its iteration cap; the returned model has ``converged=False``."""
