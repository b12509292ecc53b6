import math
from fractions import Fraction
from typing import Union

Number = Union[int, float, Fraction]


def exact_fraction(value: Number) -> Fraction:
    """
    Convert a user-facing number to an exact rational.

    Floats are read through their shortest decimal repr, so 0.1 becomes 1/10 and not its
    binary approximation: a knob typed as 0.1 means one tenth.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(repr(float(value)))


def log2_fraction(value: Number) -> Fraction:
    return Fraction(math.log2(value))


def ceil_log2(value: int) -> int:
    """Smallest n with 2^n >= value, for value >= 1."""
    return (value - 1).bit_length()
