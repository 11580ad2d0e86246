"""Exception and warning types raised by unikey."""


class UnikeyError(Exception):
    """Base class for every error raised by unikey."""


class DistributionError(UnikeyError, ValueError):
    """An invalid distribution, channel, variable layout or role assignment."""


class InputFileError(DistributionError):
    """A distribution or configuration file that cannot be parsed or validated."""


class InvariantViolation(UnikeyError, AssertionError):
    """A hard invariant failed beyond tolerance.

    Raised for violations that can only be explained by a solver bug, e.g. the
    Frank-Wolfe objective increasing between iterations or UI exceeding the
    minimum intrinsic information bound.
    """


class NormalizationWarning(UserWarning):
    """A distribution was slightly off normalization and has been renormalized."""
