import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .errors import ConfigurationError, FieldWidthError

logger = logging.getLogger("qsext")

MAX_WIDTH = 32
TABLE_WIDTH = 16

# Primitive polynomials over GF(2), one per width, as the exponents of their nonzero terms.
# Taken from the published Numerical Recipes table so every build reduces identically.
PRIMITIVE_POLYNOMIALS: dict[int, tuple[int, ...]] = {
    1: (1, 0),
    2: (2, 1, 0),
    3: (3, 1, 0),
    4: (4, 1, 0),
    5: (5, 2, 0),
    6: (6, 1, 0),
    7: (7, 1, 0),
    8: (8, 4, 3, 2, 0),
    9: (9, 4, 0),
    10: (10, 3, 0),
    11: (11, 2, 0),
    12: (12, 6, 4, 1, 0),
    13: (13, 4, 3, 1, 0),
    14: (14, 5, 3, 1, 0),
    15: (15, 1, 0),
    16: (16, 5, 3, 2, 0),
    17: (17, 3, 0),
    18: (18, 5, 2, 1, 0),
    19: (19, 5, 2, 1, 0),
    20: (20, 3, 0),
    21: (21, 2, 0),
    22: (22, 1, 0),
    23: (23, 5, 0),
    24: (24, 4, 3, 1, 0),
    25: (25, 3, 0),
    26: (26, 6, 2, 1, 0),
    27: (27, 5, 2, 1, 0),
    28: (28, 3, 0),
    29: (29, 2, 0),
    30: (30, 6, 4, 1, 0),
    31: (31, 3, 0),
    32: (32, 7, 5, 3, 2, 1, 0),
}


def reduction_polynomial(width: int) -> int:
    """The registered reduction polynomial for GF(2^width), as an integer with bit `width` set."""
    exponents = PRIMITIVE_POLYNOMIALS.get(width)
    if exponents is None:
        raise ConfigurationError(f"No reduction polynomial registered for GF(2^{width}), widths 1..{MAX_WIDTH}")
    poly = 0
    for e in exponents:
        poly |= 1 << e
    return poly


def check_element(value: int, width: int, what: str = "element"):
    if value < 0 or value >> width:
        raise FieldWidthError(f"{what} {value} does not fit in GF(2^{width})")


def gf_mul(a: int, b: int, width: int) -> int:
    """Shift-and-xor product of a and b in GF(2^width)."""
    poly = reduction_polynomial(width)
    check_element(a, width)
    check_element(b, width)
    top = 1 << width
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return result


class GaloisField:
    """
    GF(2^width) with log/antilog tables for widths up to 16 and shift-and-xor above that.

    Attributes:
        width: bits per element
        order: number of elements, 2^width
        modulus: the reduction polynomial
    """

    def __init__(self, width: int):
        self.modulus = reduction_polynomial(width)
        self.width = width
        self.order = 1 << width
        self.exp: Optional[np.ndarray] = None
        self.log: Optional[np.ndarray] = None
        if width <= TABLE_WIDTH:
            self.exp, self.log = self._build_tables()

    def _build_tables(self) -> tuple[np.ndarray, np.ndarray]:
        cycle = self.order - 1
        exp = np.zeros(2 * cycle, dtype=np.int64)
        log = np.zeros(self.order, dtype=np.int64)
        value = 1
        for i in range(cycle):
            if i > 0 and value == 1:
                raise ConfigurationError(f"Reduction polynomial for width {self.width} is not primitive")
            exp[i] = value
            log[value] = i
            # multiply by the generator x
            value <<= 1
            if value & self.order:
                value ^= self.modulus
        exp[cycle:] = exp[:cycle]
        return exp, log

    def __repr__(self) -> str:
        return f"GaloisField(width={self.width})"

    def check(self, value: int, what: str = "element"):
        check_element(value, self.width, what)

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if self.exp is None or self.log is None:
            return gf_mul(a, b, self.width)
        self.check(a)
        self.check(b)
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def mul_array(self, a: np.ndarray, b: int) -> np.ndarray:
        """Multiply every entry of a by the scalar b."""
        a = np.asarray(a, dtype=np.int64)
        if self.exp is None or self.log is None:
            return np.array([gf_mul(int(v), b, self.width) for v in a], dtype=np.int64)
        if b == 0:
            return np.zeros_like(a)
        out = self.exp[self.log[a] + self.log[b]]
        return np.where(a == 0, 0, out)

    def pow(self, a: int, e: int) -> int:
        result = 1
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in a field")
        self.check(a)
        return self.pow(a, self.order - 2)

    def elements(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)


@lru_cache(maxsize=None)
def field(width: int) -> GaloisField:
    gf = GaloisField(width)
    logger.debug("Built %r with modulus %s", gf, bin(gf.modulus))
    return gf


def inverse(a: int, width: int) -> int:
    return field(width).inv(a)


def log_tables(width: int) -> tuple[np.ndarray, np.ndarray]:
    """(exp, log) with exp[log[a] + log[b]] = a * b for nonzero a, b."""
    gf = field(width)
    if gf.exp is None or gf.log is None:
        raise FieldWidthError(f"No tables are kept for GF(2^{width}), only widths up to {TABLE_WIDTH}")
    return gf.exp, gf.log


@dataclass(frozen=True)
class FieldPoly:
    """
    Polynomial over GF(2^width), coefficients lowest degree first.

    Attributes:
        coefficients: field elements c_0, c_1, ...
        width: bits per coefficient
        degree_bound: maximum number of coefficients, if any
    """

    coefficients: tuple[int, ...]
    width: int
    degree_bound: Optional[int] = None

    def __post_init__(self):
        reduction_polynomial(self.width)
        if self.degree_bound is not None and len(self.coefficients) > self.degree_bound:
            raise FieldWidthError(
                f"{len(self.coefficients)} coefficients exceed the degree bound {self.degree_bound}"
            )
        for c in self.coefficients:
            check_element(c, self.width, "coefficient")

    @classmethod
    def from_bits(cls, bits: Sequence[int], width: int, degree_bound: int) -> "FieldPoly":
        """
        Pack a bit message into degree_bound coefficients of `width` bits, zero padded.
        Coefficient j holds bits j*width .. (j+1)*width - 1 with the first of them least significant.
        """
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.shape[0] > width * degree_bound:
            raise FieldWidthError(f"{arr.shape[0]} message bits do not fit {degree_bound} coefficients of {width} bits")
        padded = np.zeros(width * degree_bound, dtype=np.uint8)
        padded[: arr.shape[0]] = arr
        weights = np.left_shift(1, np.arange(width, dtype=np.int64))
        coefficients = padded.reshape(degree_bound, width).astype(np.int64) @ weights
        return cls(tuple(int(c) for c in coefficients), width, degree_bound)


def poly_eval(p: Union[FieldPoly, Sequence[int]], x: int, width: Optional[int] = None) -> int:
    """Horner evaluation of p at x in GF(2^width)."""
    if isinstance(p, FieldPoly):
        if width is not None and width != p.width:
            raise FieldWidthError(f"Polynomial over GF(2^{p.width}) evaluated in GF(2^{width})")
        coefficients: Sequence[int] = p.coefficients
        width = p.width
    else:
        if width is None:
            raise FieldWidthError("A plain coefficient list needs an explicit width")
        coefficients = p
        for c in coefficients:
            check_element(c, width, "coefficient")
    check_element(x, width, "point")
    gf = field(width)
    acc = 0
    for c in reversed(coefficients):
        acc = gf.mul(acc, x) ^ c
    return acc


def poly_eval_all(p: FieldPoly, points: np.ndarray) -> np.ndarray:
    """Evaluate p at every entry of points (vectorised Horner, table-backed widths only)."""
    gf = field(p.width)
    acc = np.zeros(len(points), dtype=np.int64)
    points = np.asarray(points, dtype=np.int64)
    if gf.exp is None or gf.log is None:
        return np.array([poly_eval(p, int(a)) for a in points], dtype=np.int64)
    nonzero = points != 0
    log_points = gf.log[points]
    for c in reversed(p.coefficients):
        product = np.where(nonzero & (acc != 0), gf.exp[gf.log[acc] + log_points], 0)
        acc = product ^ c
    return acc
