from typing import Any, Optional


class QsextError(Exception):
    """Base class for every error raised by qsextlib."""


class ConfigurationError(QsextError):
    """Raised for unregistered field widths, unknown design kinds or malformed constant files."""


class ParameterError(QsextError, ValueError):
    """Raised when a numeric argument is outside the range an operation accepts."""


class FieldWidthError(ParameterError):
    """Raised when a field element does not fit the declared width, or two widths disagree."""


class DesignError(ParameterError):
    """Raised for structurally invalid weak designs and for unsupported design sizes."""


class LengthMismatchError(ParameterError):
    """Raised when two bit strings (or a bit string and its declared length) disagree in length."""


class CodeIndexError(QsextError, IndexError):
    """Raised when a codeword position is outside [0, N_bar)."""


class SourceError(ParameterError):
    """Raised for invalid source distributions."""


class AdversaryError(ParameterError):
    """Raised when a storage map or distinguisher violates the density-matrix or measurement invariants."""


class BudgetExceededError(QsextError):
    """
    Raised instead of silently subsampling when an exact enumeration would be too large.

    Attributes:
        required: the size the operation would need
        budget: the configured cap
        what: short label of the quantity being counted
    """

    def __init__(self, required: int, budget: int, what: str = "enumeration"):
        self.required = required
        self.budget = budget
        self.what = what
        super().__init__(f"{what} needs {required} units, over the configured budget of {budget}")


class InfeasibleParametersError(QsextError):
    """
    Raised when no output length m >= 1 satisfies the security inequality.

    Attributes:
        terms: the per-term breakdown of the formula at m = 1, so callers can see which term is too large
    """

    def __init__(self, message: str, terms: Optional[dict[str, Any]] = None):
        self.terms = terms or {}
        super().__init__(message)
