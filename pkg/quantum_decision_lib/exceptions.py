"""
Exception hierarchy for the quantum decision library.

Input errors map to CLI exit code 2, search failures to exit code 3.
"""


class QduError(Exception):
    """Base class for every error raised by the library."""

    exit_code = 1


class InputError(QduError):
    """Bad input: a value, shape or document the library cannot accept."""

    exit_code = 2


class SearchError(QduError):
    """A bounded search ran out of budget without meeting its target."""

    exit_code = 3


# hilbert core
class ZeroVector(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NonHermitianDrift(InputError):
    pass


class NotCommuting(InputError):
    pass


class InvalidOperator(InputError):
    """Matrix fails a Hermitian, projector, PVM or unitary invariant."""


# urn model
class OutOfRange(InputError):
    pass


class ColorMismatch(InputError):
    pass


class NegativePayoff(InputError):
    pass


class InvalidUrn(InputError):
    pass


# classical baselines
class InvalidPattern(InputError):
    pass


class PairsNotSureThingRelated(InputError):
    pass


class EmptyPriorSet(InputError):
    pass


class MissingEvent(InputError):
    pass


class InvalidDistribution(InputError):
    pass


# quantum models
class UnknownAct(InputError):
    pass


class ConstraintViolated(InputError):
    pass


class EmptyData(InputError):
    pass


class BadBasis(InputError):
    pass


class NonFiniteObjective(InputError):
    pass


class InvalidSpec(InputError):
    """Experiment document failed schema or consistency checks."""


class NotFound(SearchError):
    """Pattern search exhausted its restart budget."""


class FitFailed(SearchError):
    """Fit exhausted its restart budget above the residual tolerance."""
