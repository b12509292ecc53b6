import json
import logging
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Optional, Union

from .errors import ConfigurationError

logger = logging.getLogger("qsext")


@dataclass(frozen=True)
class Constants:
    """
    Hidden constants of the security bounds, made explicit and stamped into every parameter report.

    Attributes:
        c_log: multiplier on the (log(1/eps) + log N) slack term
        c_k: multiplier in the XOR locality k = ceil(c_k * ln(2m/eps) / delta^2)
        c_L: multiplier on the Reed-Solomon/Hadamard list size 4 (m/eps)^2
    """

    c_log: float = 4
    c_k: float = 1
    c_L: float = 1

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class Budgets:
    """
    Caps that make exact computations refuse rather than run away.

    Attributes:
        enumeration: joint outcomes a distance computation may enumerate
        codeword_bits: codeword length encode_full may materialise
        list_decode_messages: messages list_decode_brute may enumerate
        design_verify_limit: largest m for which parameter solving builds and verifies the design exactly
    """

    enumeration: int = 2**28
    codeword_bits: int = 2**24
    list_decode_messages: int = 2**20
    design_verify_limit: int = 1024


DEFAULT_CONSTANTS = Constants()
DEFAULT_BUDGETS = Budgets()


def constants_from_dict(values: dict[str, Any], base: Constants = DEFAULT_CONSTANTS) -> Constants:
    known = {f.name for f in fields(Constants)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigurationError(f"Unknown constant(s) {', '.join(unknown)}, expected a subset of {sorted(known)}")
    for name, value in values.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
            raise ConfigurationError(f"Constant {name} must be a positive number, got {value!r}")
    return replace(base, **values)


def load_constants(path: Optional[Union[str, Path]]) -> Constants:
    """Read {c_log, c_k, c_L} overrides from a JSON file. A missing path gives the defaults."""
    if path is None:
        return DEFAULT_CONSTANTS
    try:
        with open(path, encoding="utf-8") as f:
            values = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"Could not read constants file {path}: {e}") from e
    if not isinstance(values, dict):
        raise ConfigurationError(f"Constants file {path} must hold a JSON object")
    constants = constants_from_dict(values)
    logger.info("Loaded constants %s from %s", constants.to_dict(), path)
    return constants
