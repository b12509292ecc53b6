import logging
from typing import Any

from qsextlib.errors import (
    BudgetExceededError,
    ConfigurationError,
    InfeasibleParametersError,
    QsextError,
)

logger = logging.getLogger("qsext")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_BUDGET = 3
EXIT_VERIFY_FAILED = 4

ERROR_MESSAGE = """qsext could not complete the command.
Run again with --verbose for the full traceback.
Error type: {error_type}
"""


class UsageError(QsextError):
    """Raised for malformed command lines and invalid option values."""


def exit_code(error: Exception) -> int:
    if isinstance(error, InfeasibleParametersError):
        return EXIT_INFEASIBLE
    if isinstance(error, BudgetExceededError):
        return EXIT_BUDGET
    return EXIT_USAGE


def error_dict(error: Exception) -> dict[str, Any]:
    if isinstance(error, InfeasibleParametersError):
        return {"error": str(error), "type": "infeasible", "terms": error.terms}
    if isinstance(error, BudgetExceededError):
        return {"error": str(error), "type": "budget", "required": error.required, "budget": error.budget}
    if isinstance(error, (UsageError, ConfigurationError)):
        return {"error": str(error), "type": "usage"}
    if isinstance(error, (QsextError, ValueError, OSError)):
        return {"error": str(error), "type": type(error).__name__}
    return {"error": ERROR_MESSAGE.format(error_type=type(error)), "type": "internal"}


def log_error(error: Exception, command: str):
    if isinstance(error, (QsextError, ValueError, OSError)):
        logger.error("%s failed: %s", command, error)
    else:
        logger.exception("Exception in %s: %s", command, error)
