"""Exception types raised by the library.

Every error carries a ``code`` attribute, which the CLI prints as
``ERROR <code>: <message>``.
"""


class HoseError(Exception):
    """Base class for all library errors."""

    code = "HoseError"


class InvalidMode(HoseError, ValueError):
    code = "InvalidMode"


class ShapeError(HoseError, ValueError):
    code = "ShapeError"


class CapacityError(HoseError, ValueError):
    code = "CapacityError"


class InvalidRank(HoseError, ValueError):
    code = "InvalidRank"


class RankDeficient(HoseError, ArithmeticError):
    """A mode-specific singular value is zero (or numerically so)."""

    code = "RankDeficient"


class DegenerateSpectrum(HoseError, ArithmeticError):
    """Two squared mode-specific singular values are (nearly) tied."""

    code = "DegenerateSpectrum"


class ThresholdAtKink(HoseError, ArithmeticError):
    """A threshold sits on a singular value, where the derivative is undefined."""

    code = "ThresholdAtKink"


class EmptyActiveSet(HoseError, ArithmeticError):
    code = "EmptyActiveSet"


class NonFinite(HoseError, ArithmeticError):
    code = "NonFinite"


class GsureUndefined(HoseError, UserWarning):
    """GSURE has no value when the divergence reaches ``p``.

    Used as a warning category; risk estimates flag it instead of raising.
    """

    code = "GsureUndefined"


class TensorFormatError(HoseError, ValueError):
    code = "TensorFormatError"


class StudyFailed(HoseError, RuntimeError):
    """Too many Monte Carlo replicates failed for the study to be trusted."""

    code = "StudyFailed"
