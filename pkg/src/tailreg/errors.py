"""Exception hierarchy.

Input problems derive from ``ValueError``; numerical breakdowns derive from
``ArithmeticError`` so the CLI can map them to distinct exit codes.
"""


class TailRegError(Exception):
    """Base class for every error raised by tailreg."""


class InputError(TailRegError, ValueError):
    """Invalid arguments or data supplied by the caller."""


class NumericalError(TailRegError, ArithmeticError):
    """A computation could not be completed reliably."""


class DegenerateObservation(InputError):
    """A response does not strictly exceed the tail threshold."""


class DimensionMismatch(InputError):
    pass


class UnsupportedDesign(InputError):
    pass


class DomainError(InputError):
    """A distribution parameter or probability lies outside its domain."""


class InsufficientData(InputError):
    pass


class GridExhausted(InputError):
    """No tail fraction in the grid leaves enough observations to estimate."""


class BandwidthTooLarge(InputError):
    pass


class SingularDesign(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass


class ExperimentFailed(NumericalError):
    """Too many Monte Carlo replications failed to produce an estimate."""
