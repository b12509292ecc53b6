import json
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import ConfigurationError, DesignError
from .galois import MAX_WIDTH, field

logger = logging.getLogger("qsext")

DESIGN_KINDS = ("poly", "disjoint")


@dataclass(frozen=True)
class WeakDesign:
    """
    A family S_1..S_m of n-element subsets of [0, t), with the measured weak-design ratio.

    Attributes:
        t: universe size, i.e. the seed length in bits
        n: size of every set, i.e. the code index length
        m: number of sets, i.e. the output length
        sets: the sets, each sorted ascending
        rho_achieved: max_j sum_{i<j} 2^|S_i & S_j| / (m - 1), exactly; 1 when m = 1
    """

    t: int
    n: int
    m: int
    sets: tuple[tuple[int, ...], ...]
    rho_achieved: Fraction

    def __post_init__(self):
        # canonical order so that the seed index never depends on how a set was produced
        object.__setattr__(self, "sets", tuple(tuple(sorted(s)) for s in self.sets))

    @classmethod
    def from_sets(cls, t: int, n: int, sets: Sequence[Sequence[int]]) -> "WeakDesign":
        canonical = tuple(tuple(sorted(int(v) for v in s)) for s in sets)
        rho = _weak_design_ratio(t, n, canonical)
        return cls(t=t, n=n, m=len(canonical), sets=canonical, rho_achieved=rho)

    def to_json(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "n": self.n,
            "m": self.m,
            "rho_achieved": str(self.rho_achieved),
            "sets": [list(s) for s in self.sets],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "WeakDesign":
        design = cls(
            t=int(data["t"]),
            n=int(data["n"]),
            m=int(data["m"]),
            sets=tuple(tuple(int(v) for v in s) for s in data["sets"]),
            rho_achieved=Fraction(data["rho_achieved"]),
        )
        if verify_design(design) != design.rho_achieved:
            raise DesignError("Stored rho_achieved does not match the recomputed ratio")
        return design

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def index_array(self) -> np.ndarray:
        """The sets as an (m, n) integer array."""
        return np.array(self.sets, dtype=np.int64).reshape(self.m, self.n)


def _check_structure(t: int, n: int, sets: Sequence[Sequence[int]]):
    if n < 1:
        raise DesignError(f"Set size must be at least 1, got {n}")
    if len(sets) < 1:
        raise DesignError("A design needs at least one set")
    for i, s in enumerate(sets):
        if len(s) != n or len(set(s)) != n:
            raise DesignError(f"Set {i} has {len(set(s))} distinct elements, expected {n}")
        for v in s:
            if v < 0 or v >= t:
                raise DesignError(f"Set {i} holds {v}, outside the universe [0, {t})")


def _weak_design_ratio(t: int, n: int, sets: Sequence[Sequence[int]]) -> Fraction:
    _check_structure(t, n, sets)
    m = len(sets)
    if m == 1:
        return Fraction(1)
    # element -> indices of the earlier sets holding it
    incidence: dict[int, list[int]] = {}
    worst = 0
    for j, s in enumerate(sets):
        counts: dict[int, int] = {}
        for v in s:
            for i in incidence.get(v, ()):
                counts[i] = counts.get(i, 0) + 1
        # sets disjoint from S_j contribute 2^0 each
        total = (j - len(counts)) + sum(1 << c for c in counts.values())
        worst = max(worst, total)
        for v in s:
            incidence.setdefault(v, []).append(j)
    return Fraction(worst, m - 1)


def verify_design(design: WeakDesign) -> Fraction:
    """Recompute max_j sum_{i<j} 2^|S_i & S_j| / (m - 1) exactly."""
    if len(design.sets) != design.m:
        raise DesignError(f"Design declares m={design.m} but holds {len(design.sets)} sets")
    return _weak_design_ratio(design.t, design.n, design.sets)


def field_size_for(n: int) -> int:
    """Smallest power of two q >= n with a registered GF(q)."""
    if n < 1:
        raise DesignError(f"Set size must be at least 1, got {n}")
    width = max(1, (n - 1).bit_length())
    if width > MAX_WIDTH:
        raise DesignError(f"No field of size >= {n} is registered")
    return 1 << width


def design_degree_bound(q: int, m: int) -> int:
    """Minimal d >= 1 with q^d >= m."""
    d = 1
    while q**d < m:
        d += 1
    return d


def certified_rho_bound(kind: str, n: int, m: int) -> Fraction:
    """
    Upper bound on rho_achieved known without building the design.
    Distinct polynomials of degree < d agree on fewer than d points, so every term is at most 2^(d-1).
    """
    if kind == "disjoint" or m == 1:
        return Fraction(1)
    if kind == "poly":
        return Fraction(2 ** (design_degree_bound(field_size_for(n), m) - 1))
    raise ConfigurationError(f"Unknown design kind {kind!r}, expected one of {DESIGN_KINDS}")


def design_universe(kind: str, n: int, m: int) -> int:
    if kind == "disjoint":
        return n * m
    if kind == "poly":
        return n * field_size_for(n)
    raise ConfigurationError(f"Unknown design kind {kind!r}, expected one of {DESIGN_KINDS}")


def _poly_coefficients(i: int, q: int, d: int) -> list[int]:
    """Base-q digits of i, lowest degree first."""
    coefficients = []
    for _ in range(d):
        coefficients.append(i % q)
        i //= q
    return coefficients


def _graph(coefficients: list[int], points: np.ndarray, q: int) -> np.ndarray:
    gf = field(q.bit_length() - 1)
    acc = np.zeros(len(points), dtype=np.int64)
    for c in reversed(coefficients):
        acc = np.bitwise_xor(_mul_points(gf, acc, points), c)
    return points * q + acc


def _mul_points(gf, acc: np.ndarray, points: np.ndarray) -> np.ndarray:
    if gf.exp is None or gf.log is None:
        return np.array([gf.mul(int(a), int(p)) for a, p in zip(acc, points)], dtype=np.int64)
    product = gf.exp[gf.log[acc] + gf.log[points]]
    return np.where((acc == 0) | (points == 0), 0, product)


def _check_poly_size(n: int, m: int, q: int):
    if m < 1:
        raise DesignError(f"A design needs m >= 1, got {m}")
    # there are q^n distinct graphs over n points
    if m > q**n:
        raise DesignError(f"m={m} exceeds the {q}^{n} polynomials available over GF({q})")


def poly_design_set(n: int, m: int, i: int) -> tuple[int, ...]:
    """
    Emit set S_i (0-based) of the polynomial design alone, by unranking the i-th polynomial.
    Runs in time polynomial in n and log m.
    """
    q = field_size_for(n)
    _check_poly_size(n, m, q)
    if i < 0 or i >= m:
        raise DesignError(f"Set index {i} outside [0, {m})")
    d = design_degree_bound(q, m)
    points = np.arange(n, dtype=np.int64)
    return tuple(int(v) for v in _graph(_poly_coefficients(i, q, d), points, q))


def build_padded_poly_design(n: int, m: int) -> WeakDesign:
    """
    Polynomial-graph design for any set size n: polynomials over GF(q), q the smallest power of
    two >= n, evaluated at the first n field elements; element (a, v) is stored as a*q + v.
    """
    q = field_size_for(n)
    _check_poly_size(n, m, q)
    d = design_degree_bound(q, m)
    points = np.arange(n, dtype=np.int64)
    sets = [tuple(int(v) for v in _graph(_poly_coefficients(i, q, d), points, q)) for i in range(m)]
    design = WeakDesign.from_sets(n * q, n, sets)
    logger.info(
        "Built polynomial design n=%d m=%d over GF(%d), degree bound %d, t=%d, rho=%s",
        n,
        m,
        q,
        d,
        design.t,
        design.rho_achieved,
    )
    return design


def build_poly_design(n: int, m: int) -> WeakDesign:
    """Polynomial-graph design with n = q a power of two, universe GF(q) x GF(q)."""
    if n < 1 or n & (n - 1):
        raise DesignError(f"Set size {n} is not a supported field size (a power of two)")
    return build_padded_poly_design(n, m)


def build_disjoint_design(n: int, m: int) -> WeakDesign:
    if n < 1 or m < 1:
        raise DesignError(f"A disjoint design needs n, m >= 1, got n={n} m={m}")
    sets = tuple(tuple(range(i * n, (i + 1) * n)) for i in range(m))
    return WeakDesign(t=n * m, n=n, m=m, sets=sets, rho_achieved=Fraction(1))


def build_design(kind: str, n: int, m: int) -> WeakDesign:
    if kind == "poly":
        return build_padded_poly_design(n, m)
    if kind == "disjoint":
        return build_disjoint_design(n, m)
    raise ConfigurationError(f"Unknown design kind {kind!r}, expected one of {DESIGN_KINDS}")
