import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Any, Callable, Optional, Union

import numpy as np

from .bits import BitsLike, CountingSource, as_bit_array, bits_to_int, int_to_bits
from .errors import (
    BudgetExceededError,
    CodeIndexError,
    FieldWidthError,
    LengthMismatchError,
    ParameterError,
)
from .galois import MAX_WIDTH, FieldPoly, poly_eval, poly_eval_all
from .quantities import Number, ceil_log2, exact_fraction
from .settings import DEFAULT_BUDGETS, Budgets

logger = logging.getLogger("qsext")

Message = Union[BitsLike, CountingSource]


class CodeKind(str, Enum):
    HADAMARD = "hadamard"
    RS_HADAMARD = "rs_hadamard"
    XOR_K = "xor_k"


@dataclass(frozen=True)
class CodeSpec:
    """
    A binary code C: {0,1}^N -> {0,1}^N_bar with local bit evaluation.

    Attributes:
        kind: which construction
        N: message length in bits
        N_bar: codeword length, always a power of two
        index_bits: log2(N_bar), the number of seed bits a position takes
        field_width: l, for rs_hadamard only
        degree: number of polynomial coefficients d, for rs_hadamard only
        k: locality, for xor_k only
    """

    kind: CodeKind
    N: int
    N_bar: int
    index_bits: int
    field_width: Optional[int] = None
    degree: Optional[int] = None
    k: Optional[int] = None

    @classmethod
    def hadamard(cls, N: int) -> "CodeSpec":
        if N < 1:
            raise ParameterError(f"Message length must be at least 1, got {N}")
        return cls(kind=CodeKind.HADAMARD, N=N, N_bar=1 << N, index_bits=N)

    @classmethod
    def rs_hadamard(
        cls, N: int, epsilon: Optional[Number] = None, width: Optional[int] = None, degree: Optional[int] = None
    ) -> "CodeSpec":
        """
        Reed-Solomon over GF(2^l) concatenated with the Hadamard code of length 2^l.
        Pass either a target margin epsilon (l is then sized) or an explicit width.
        """
        if N < 1:
            raise ParameterError(f"Message length must be at least 1, got {N}")
        if width is None:
            if epsilon is None:
                raise ParameterError("rs_hadamard needs either epsilon or an explicit field width")
            width = rs_field_width(N, epsilon)
        if width < 1 or width > MAX_WIDTH:
            raise FieldWidthError(f"Field width {width} outside 1..{MAX_WIDTH}")
        if degree is None:
            degree = -(-N // width)
        if degree * width < N:
            raise FieldWidthError(f"{degree} coefficients of {width} bits cannot hold {N} message bits")
        return cls(
            kind=CodeKind.RS_HADAMARD,
            N=N,
            N_bar=1 << (2 * width),
            index_bits=2 * width,
            field_width=width,
            degree=degree,
        )

    @classmethod
    def xor(cls, N: int, k: int) -> "CodeSpec":
        if k < 1 or k > N:
            raise ParameterError(f"XOR locality must satisfy 1 <= k <= N, got k={k} N={N}")
        n = ceil_log2(math.comb(N, k))
        return cls(kind=CodeKind.XOR_K, N=N, N_bar=1 << n, index_bits=n, k=k)

    @property
    def positions(self) -> int:
        """Number of distinct codeword positions before the power-of-two padding."""
        if self.kind == CodeKind.XOR_K:
            assert self.k is not None
            return math.comb(self.N, self.k)
        return self.N_bar

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "kind": self.kind.value,
            "N": self.N,
            "N_bar": str(self.N_bar) if self.N_bar >= 2**53 else self.N_bar,
            "index_bits": self.index_bits,
        }
        if self.kind == CodeKind.RS_HADAMARD:
            data["field_width"] = self.field_width
            data["degree"] = self.degree
        if self.kind == CodeKind.XOR_K:
            data["k"] = self.k
        return data

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "CodeSpec":
        kind = CodeKind(data["kind"])
        if kind == CodeKind.HADAMARD:
            return cls.hadamard(int(data["N"]))
        if kind == CodeKind.RS_HADAMARD:
            return cls.rs_hadamard(int(data["N"]), width=int(data["field_width"]), degree=int(data["degree"]))
        return cls.xor(int(data["N"]), int(data["k"]))


def rs_field_width(N: int, epsilon: Number) -> int:
    """Minimal l with 2^l >= ceil(4 * ceil(N/l) / eps^2)."""
    eps = exact_fraction(epsilon)
    if eps <= 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    for width in range(1, MAX_WIDTH + 1):
        degree = -(-N // width)
        if (1 << width) >= math.ceil(4 * degree / eps**2):
            return width
    raise FieldWidthError(f"No field width up to {MAX_WIDTH} reaches margin {epsilon} for N={N}")


def _parity_int(value: int) -> int:
    return bin(value).count("1") & 1


def _parity_array(values: np.ndarray) -> np.ndarray:
    v = values.astype(np.int64)
    for shift in (32, 16, 8, 4, 2, 1):
        v = v ^ (v >> shift)
    return (v & 1).astype(np.uint8)


def rank_subset(N: int, subset: Sequence[int]) -> int:
    """Lexicographic rank of a sorted k-subset of [0, N)."""
    k = len(subset)
    total = math.comb(N, k)
    colex = 0
    for j, element in enumerate(sorted(subset, reverse=True)):
        colex += math.comb(N - 1 - element, j + 1)
    return total - 1 - colex


def unrank_subset(N: int, k: int, rank: int) -> tuple[int, ...]:
    """
    The rank-th k-subset of [0, N) in lexicographic order, via the combinatorial number system
    on complements. O(k log N) binomial evaluations.
    """
    total = math.comb(N, k)
    if rank < 0 or rank >= total:
        raise CodeIndexError(f"Subset rank {rank} outside [0, {total})")
    remainder = total - 1 - rank
    hi = N - 1
    elements = []
    for j in range(k, 0, -1):
        lo = j - 1
        top = hi
        # largest c in [lo, top] with comb(c, j) <= remainder
        while lo < top:
            mid = (lo + top + 1) // 2
            if math.comb(mid, j) <= remainder:
                lo = mid
            else:
                top = mid - 1
        remainder -= math.comb(lo, j)
        elements.append(N - 1 - lo)
        hi = lo - 1
    return tuple(elements)


def _check_index(spec: CodeSpec, y: int):
    if y < 0 or y >= spec.N_bar:
        raise CodeIndexError(f"Codeword position {y} outside [0, {spec.N_bar})")


def _message_bits(spec: CodeSpec, x: Message) -> Union[np.ndarray, CountingSource]:
    if isinstance(x, CountingSource):
        if len(x) != spec.N:
            raise LengthMismatchError(f"message has {len(x)} bits, expected {spec.N}")
        return x
    return as_bit_array(x, spec.N, "message")


def _read_all(x: Union[np.ndarray, CountingSource]) -> np.ndarray:
    if isinstance(x, CountingSource):
        return np.array([x[i] for i in range(len(x))], dtype=np.uint8)
    return x


def bit_evaluator(spec: CodeSpec, x: Message) -> Callable[[int], int]:
    """
    Prepare message x once and return y -> C(x)_y.

    The xor_k evaluator touches exactly k message bits per call. The other kinds read the whole
    message up front.
    """
    bits = _message_bits(spec, x)

    if spec.kind == CodeKind.HADAMARD:
        x_int = bits_to_int(_read_all(bits))

        def hadamard_bit(y: int) -> int:
            _check_index(spec, y)
            return _parity_int(x_int & y)

        return hadamard_bit

    if spec.kind == CodeKind.RS_HADAMARD:
        assert spec.field_width is not None and spec.degree is not None
        width = spec.field_width
        mask = (1 << width) - 1
        poly = FieldPoly.from_bits(_read_all(bits), width, spec.degree)

        def rs_hadamard_bit(y: int) -> int:
            _check_index(spec, y)
            return _parity_int(poly_eval(poly, y >> width) & (y & mask))

        return rs_hadamard_bit

    assert spec.k is not None
    k = spec.k
    total = math.comb(spec.N, k)

    def xor_bit(y: int) -> int:
        _check_index(spec, y)
        bit = 0
        for i in unrank_subset(spec.N, k, y % total):
            bit ^= int(bits[i])
        return bit

    return xor_bit


def code_bit(spec: CodeSpec, x: Message, y: int) -> int:
    return bit_evaluator(spec, x)(y)


@lru_cache(maxsize=32)
def _lex_subsets(N: int, k: int) -> np.ndarray:
    return np.array(list(combinations(range(N), k)), dtype=np.int64).reshape(-1, k)


def encode_full(spec: CodeSpec, x: BitsLike, budgets: Budgets = DEFAULT_BUDGETS) -> np.ndarray:
    """The whole N_bar-bit codeword of x, as a uint8 array."""
    if spec.N_bar > budgets.codeword_bits:
        raise BudgetExceededError(spec.N_bar, budgets.codeword_bits, "codeword bits")
    bits = as_bit_array(x, spec.N, "message")

    if spec.kind == CodeKind.HADAMARD:
        positions = np.arange(spec.N_bar, dtype=np.int64)
        return _parity_array(positions & bits_to_int(bits))

    if spec.kind == CodeKind.RS_HADAMARD:
        assert spec.field_width is not None and spec.degree is not None
        q = 1 << spec.field_width
        poly = FieldPoly.from_bits(bits, spec.field_width, spec.degree)
        values = poly_eval_all(poly, np.arange(q, dtype=np.int64))
        masks = np.arange(q, dtype=np.int64)
        # row a, column s is position (a << l) | s
        return _parity_array(values[:, None] & masks[None, :]).reshape(-1)

    assert spec.k is not None
    subsets = _lex_subsets(spec.N, spec.k)
    base = np.bitwise_xor.reduce(bits[subsets], axis=1).astype(np.uint8)
    return base[np.arange(spec.N_bar) % base.shape[0]]


@lru_cache(maxsize=16)
def _codebook(spec: CodeSpec, codeword_bits: int) -> np.ndarray:
    budgets = Budgets(codeword_bits=codeword_bits)
    book = np.empty((1 << spec.N, spec.N_bar), dtype=np.uint8)
    for z in range(1 << spec.N):
        book[z] = encode_full(spec, int_to_bits(z, spec.N), budgets)
    book.setflags(write=False)
    return book


def codebook(spec: CodeSpec, budgets: Budgets = DEFAULT_BUDGETS) -> np.ndarray:
    """All 2^N codewords, row z being C(z)."""
    if (1 << spec.N) > budgets.list_decode_messages:
        raise BudgetExceededError(1 << spec.N, budgets.list_decode_messages, "messages")
    if (1 << spec.N) * spec.N_bar > budgets.enumeration:
        raise BudgetExceededError((1 << spec.N) * spec.N_bar, budgets.enumeration, "codebook bits")
    return _codebook(spec, budgets.codeword_bits)


def relative_distance(a: BitsLike, b: BitsLike) -> Fraction:
    a_arr = np.asarray(a, dtype=np.uint8)
    b_arr = np.asarray(b, dtype=np.uint8)
    if a_arr.shape != b_arr.shape:
        raise LengthMismatchError(f"Cannot compare strings of {a_arr.size} and {b_arr.size} bits")
    if a_arr.size == 0:
        return Fraction(0)
    return Fraction(int(np.count_nonzero(a_arr != b_arr)), int(a_arr.size))


@dataclass(frozen=True)
class ListDecodeResult:
    """
    Attributes:
        candidates: cluster representatives, as message integers (bit i of the integer is z_i)
        epsilon: agreement margin
        delta: merge radius
        L_observed: number of representatives
        matches: every message within relative distance 1/2 - epsilon of the word, before merging
    """

    candidates: tuple[int, ...]
    epsilon: float
    delta: float
    L_observed: int
    matches: tuple[int, ...]


def _lex_key(N: int) -> Callable[[int], tuple[int, ...]]:
    def key(z: int) -> tuple[int, ...]:
        return tuple((z >> i) & 1 for i in range(N))

    return key


def list_decode_brute(
    spec: CodeSpec,
    word: BitsLike,
    epsilon: Number,
    delta: Number = 0,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> ListDecodeResult:
    """
    Every message z with relative distance(word, C(z)) < 1/2 - epsilon, merged greedily
    (first fit, lexicographic order) into representatives at most delta apart.
    """
    eps = exact_fraction(epsilon)
    radius = exact_fraction(delta)
    if eps <= 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    if radius < 0:
        raise ParameterError(f"delta must be nonnegative, got {delta}")
    received = as_bit_array(word, spec.N_bar, "received word")
    if eps >= Fraction(1, 2):
        return ListDecodeResult((), float(epsilon), float(delta), 0, ())

    book = codebook(spec, budgets)
    distances = np.count_nonzero(book != received[None, :], axis=1)
    # distance < N_bar (1/2 - eps)  <=>  distance <= ceil(N_bar (1/2 - eps)) - 1
    limit = math.ceil(spec.N_bar * (Fraction(1, 2) - eps)) - 1
    matches = sorted((int(z) for z in np.flatnonzero(distances <= limit)), key=_lex_key(spec.N))

    merge = math.floor(radius * spec.N)
    representatives: list[int] = []
    for z in matches:
        if not any(_weight(z ^ r) <= merge for r in representatives):
            representatives.append(z)
    return ListDecodeResult(
        candidates=tuple(representatives),
        epsilon=float(epsilon),
        delta=float(delta),
        L_observed=len(representatives),
        matches=tuple(matches),
    )


def _weight(value: int) -> int:
    return bin(value).count("1")


def position_bias(spec: CodeSpec) -> dict[str, Any]:
    """How often each distinct codeword position is hit by a uniform n-bit index."""
    positions = spec.positions
    low = spec.N_bar // positions
    high = low + (1 if spec.N_bar % positions else 0)
    return {
        "positions": positions,
        "N_bar": spec.N_bar,
        "min_hits": low,
        "max_hits": high,
        "max_over_min": high / low,
    }


def johnson_list_bound(epsilon: Number) -> Fraction:
    return 1 / (4 * exact_fraction(epsilon) ** 2)


def xor_list_bound(epsilon: Number) -> Fraction:
    return 4 / exact_fraction(epsilon) ** 2


def xor_list_radius(k: int, epsilon: float) -> float:
    """(1/k) ln(2/eps), the XOR code's approximate list-decoding radius."""
    return math.log(2 / epsilon) / k
