import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Optional

from .codes import rs_field_width, xor_list_radius
from .designs import (
    DESIGN_KINDS,
    build_design,
    certified_rho_bound,
    design_universe,
)
from .errors import (
    ConfigurationError,
    DesignError,
    FieldWidthError,
    InfeasibleParametersError,
    ParameterError,
)
from .quantities import Number, ceil_log2, exact_fraction, log2_fraction
from .settings import DEFAULT_BUDGETS, DEFAULT_CONSTANTS, Budgets, Constants

logger = logging.getLogger("qsext")

MAX_SOLVER_ITERATIONS = 64


class Variant(str, Enum):
    RS_HADAMARD = "rs_hadamard"
    XOR = "xor"


def binary_entropy(p: float) -> float:
    """H(p) in bits, with H(0) = H(1) = 0."""
    if p < 0 or p > 1:
        raise ParameterError(f"Binary entropy is defined on [0, 1], got {p}")
    if p == 0 or p == 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


@dataclass(frozen=True)
class ParamKnobs:
    """
    Variant-specific inputs to compute_params.

    Attributes:
        gamma: rs_hadamard, sets the reported design ratio target K^(gamma/2)
        alpha: K defaults to floor(alpha * N) when K is not given
        delta: xor, the approximation knob; the list-decoding radius is delta^2 / c_k
        c: epsilon defaults to N^(-c) when epsilon is not given
        design: weak design construction, "poly" or "disjoint"
        constants: hidden constants of the bound
        budgets: design_verify_limit decides whether rho is verified or certified
        diagnostic_zero_slack: drop t, log L and the slack term, charge 2*delta*N for the xor
            entropy loss and use rho = 1, reproducing the closed-form headline arithmetic
    """

    gamma: Optional[float] = None
    alpha: Optional[float] = None
    delta: Optional[float] = None
    c: float = 1
    design: str = "poly"
    constants: Constants = DEFAULT_CONSTANTS
    budgets: Budgets = DEFAULT_BUDGETS
    diagnostic_zero_slack: bool = False


@dataclass(frozen=True)
class ExtractorParams:
    """
    Every scalar of the security inequality, for one solved configuration.

    Attributes:
        N: source length
        K: min-entropy requirement
        b: adversary storage in qubits
        epsilon: target error
        m: output length
        t: seed length
        n: code index length, log2(N_bar)
        rho: design ratio that entered the inequality
        delta: list-decoding radius
        L: list-size bound
        entropy_delta: H(delta)
        variant: rs_hadamard or xor
        k: XOR locality, xor only
        constants: c_log, c_k, c_L
        design: design construction kind
        rho_source: "verified" (built and measured), "certified" (degree bound) or "diagnostic"
        rho_target: the ratio the preset aims for, reported next to rho
        delta_knob: the xor approximation knob the radius was derived from
        field_width: l, rs_hadamard only
        diagnostic: whether lower-order terms were zeroed
        notes: remarks collected while solving
    """

    N: int
    K: int
    b: int
    epsilon: float
    m: int
    t: int
    n: int
    rho: Fraction
    delta: float
    L: int
    entropy_delta: float
    variant: Variant
    k: Optional[int] = None
    constants: Constants = DEFAULT_CONSTANTS
    design: str = "poly"
    rho_source: str = "verified"
    rho_target: Optional[float] = None
    delta_knob: Optional[float] = None
    field_width: Optional[int] = None
    diagnostic: bool = False
    notes: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 0 < self.epsilon < 0.5:
            raise ParameterError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if self.b < 0:
            raise ParameterError(f"b must be nonnegative, got {self.b}")
        if not 0 < self.K <= self.N:
            raise ParameterError(f"K must lie in (0, N], got K={self.K} N={self.N}")
        if self.m < 1:
            raise ParameterError(f"m must be at least 1, got {self.m}")
        if abs(self.entropy_delta - binary_entropy(self.delta)) > 1e-12:
            raise ParameterError("entropy_delta does not match H(delta)")

    @property
    def N_bar(self) -> int:
        return 1 << self.n

    def entropy_term(self) -> Fraction:
        if self.diagnostic and self.variant == Variant.XOR and self.delta_knob is not None:
            # H(delta^2) <= 2 delta
            return 2 * exact_fraction(self.delta_knob) * self.N
        return Fraction(self.entropy_delta) * self.N

    def formula_terms(self) -> dict[str, Fraction]:
        return bound_terms(
            K=self.K,
            b=self.b,
            epsilon=self.epsilon,
            N=self.N,
            t=self.t,
            entropy=self.entropy_term(),
            L=self.L,
            rho=self.rho,
            m=self.m,
            constants=self.constants,
            diagnostic=self.diagnostic,
        )

    def satisfies_bound(self) -> bool:
        terms = self.formula_terms()
        return terms["m"] <= terms["rhs"]

    def to_json(self) -> dict[str, Any]:
        return {
            "N": self.N,
            "K": self.K,
            "b": self.b,
            "epsilon": self.epsilon,
            "m": self.m,
            "t": self.t,
            "n": self.n,
            "N_bar": str(self.N_bar) if self.n >= 53 else self.N_bar,
            "rho": str(self.rho),
            "rho_source": self.rho_source,
            "rho_target": self.rho_target,
            "delta": self.delta,
            "delta_knob": self.delta_knob,
            "L": self.L,
            "entropy_delta": self.entropy_delta,
            "variant": self.variant.value,
            "k": self.k,
            "field_width": self.field_width,
            "design": self.design,
            "constants": self.constants.to_dict(),
            "diagnostic_zero_slack": self.diagnostic,
            "terms": {name: float(value) for name, value in self.formula_terms().items()},
            "satisfies_bound": self.satisfies_bound(),
            "notes": list(self.notes),
        }


def bound_terms(
    K: int,
    b: int,
    epsilon: float,
    N: int,
    t: int,
    entropy: Fraction,
    L: int,
    rho: Fraction,
    m: int,
    constants: Constants,
    diagnostic: bool = False,
) -> dict[str, Fraction]:
    """
    Terms of m <= (K - b - t - H(delta)N - log L - c_log (log 1/eps + log N)) / (1 + rho).
    Logarithms enter as the exact rationals of their float values.
    """
    t_term = Fraction(0) if diagnostic else Fraction(t)
    log_L = Fraction(0) if diagnostic else log2_fraction(L)
    slack = (
        Fraction(0)
        if diagnostic
        else exact_fraction(constants.c_log) * (log2_fraction(1 / epsilon) + log2_fraction(N))
    )
    numerator = K - b - t_term - entropy - log_L - slack
    denominator = 1 + rho
    return {
        "K": Fraction(K),
        "b": Fraction(b),
        "t": t_term,
        "entropy": entropy,
        "log_L": log_L,
        "slack": slack,
        "numerator": numerator,
        "one_plus_rho": denominator,
        "rhs": numerator / denominator,
        "m": Fraction(m),
    }


@dataclass(frozen=True)
class _Candidate:
    m: int
    n: int
    t: int
    L: int
    radius: Fraction
    k: Optional[int]
    field_width: Optional[int]
    rho: Fraction
    entropy: Fraction
    notes: tuple[str, ...]
    failure: Optional[str] = None


class _Solver:
    def __init__(
        self, N: int, K: int, b: int, epsilon: float, variant: Variant, knobs: ParamKnobs, delta_knob: Optional[Fraction]
    ):
        self.N = N
        self.K = K
        self.b = b
        self.epsilon = epsilon
        self.eps = exact_fraction(epsilon)
        self.variant = variant
        self.knobs = knobs
        self.constants = knobs.constants
        self.delta_knob = delta_knob
        self.diagnostic = knobs.diagnostic_zero_slack

    def candidate(self, m: int) -> _Candidate:
        notes: list[str] = []
        failure: Optional[str] = None
        k: Optional[int] = None
        width: Optional[int] = None
        n = 0
        if self.variant == Variant.RS_HADAMARD:
            radius = Fraction(0)
            L = math.ceil(4 * (m / self.eps) ** 2 * exact_fraction(self.constants.c_L))
            try:
                width = rs_field_width(self.N, self.eps / m)
                n = 2 * width
            except FieldWidthError as e:
                failure = str(e)
        else:
            assert self.delta_knob is not None
            c_k = exact_fraction(self.constants.c_k)
            radius = self.delta_knob**2 / c_k
            L = math.ceil(4 * (m / self.eps) ** 2)
            k = math.ceil(float(c_k) * math.log(2 * m / self.epsilon) / float(self.delta_knob**2))
            if k >= self.N:
                failure = f"XOR locality k={k} is not below N={self.N}"
            else:
                n = ceil_log2(math.comb(self.N, k))
        t = 0
        rho = Fraction(1)
        if failure is None:
            t = design_universe(self.knobs.design, n, m)
            rho = certified_rho_bound(self.knobs.design, n, m)
        if self.diagnostic:
            if failure is not None:
                notes.append(f"{failure}; ignored in diagnostic mode")
                failure = None
            rho = Fraction(1)
            entropy = 2 * self.delta_knob * self.N if self.variant == Variant.XOR and self.delta_knob else Fraction(0)
        else:
            entropy = Fraction(binary_entropy(float(radius))) * self.N
        return _Candidate(m, n, t, L, radius, k, width, rho, entropy, tuple(notes), failure)

    def terms(self, cand: _Candidate) -> dict[str, Fraction]:
        return bound_terms(
            K=self.K,
            b=self.b,
            epsilon=self.epsilon,
            N=self.N,
            t=cand.t,
            entropy=cand.entropy,
            L=cand.L,
            rho=cand.rho,
            m=cand.m,
            constants=self.constants,
            diagnostic=self.diagnostic,
        )

    def feasible(self, m: int) -> bool:
        cand = self.candidate(m)
        if cand.failure is not None:
            return False
        return m <= self.terms(cand)["rhs"]

    def largest_m(self) -> int:
        lo, hi = 1, self.K
        iterations = 0
        while lo < hi and iterations < MAX_SOLVER_ITERATIONS:
            mid = (lo + hi + 1) // 2
            if self.feasible(mid):
                lo = mid
            else:
                hi = mid - 1
            iterations += 1
            logger.debug("Solver iteration %d: m in [%d, %d]", iterations, lo, hi)
        return lo


def _resolve_inputs(
    N: int, K: Optional[int], b: int, epsilon: Optional[float], variant: Variant, knobs: ParamKnobs
) -> tuple[int, float, Optional[Fraction]]:
    if N < 2:
        raise ParameterError(f"N must be at least 2, got {N}")
    if b < 0:
        raise ParameterError(f"b must be nonnegative, got {b}")
    if knobs.design not in DESIGN_KINDS:
        raise ConfigurationError(f"Unknown design kind {knobs.design!r}, expected one of {DESIGN_KINDS}")
    if K is None:
        if knobs.alpha is None:
            raise ParameterError("Either K or alpha must be given")
        if not 0 < knobs.alpha <= 1:
            raise ParameterError(f"alpha must lie in (0, 1], got {knobs.alpha}")
        K = math.floor(exact_fraction(knobs.alpha) * N)
    if not 0 < K <= N:
        raise ParameterError(f"K must lie in (0, N], got K={K} N={N}")
    if epsilon is None:
        if knobs.c <= 0:
            raise ParameterError(f"c must be positive, got {knobs.c}")
        epsilon = float(N) ** -knobs.c
    if not 0 < epsilon < 0.5:
        raise ParameterError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    delta_knob: Optional[Fraction] = None
    if variant == Variant.XOR:
        if knobs.delta is None:
            raise ParameterError("The xor variant needs the delta knob")
        delta_knob = exact_fraction(knobs.delta)
        if delta_knob <= 0 or delta_knob**2 / exact_fraction(knobs.constants.c_k) > Fraction(1, 2):
            raise ParameterError(f"delta knob {knobs.delta} gives a radius outside (0, 1/2]")
    if knobs.gamma is not None and knobs.gamma <= 0:
        raise ParameterError(f"gamma must be positive, got {knobs.gamma}")
    return K, epsilon, delta_knob


def compute_params(
    N: int,
    K: Optional[int],
    b: int,
    epsilon: Optional[float],
    variant: Variant,
    knobs: ParamKnobs = ParamKnobs(),
) -> ExtractorParams:
    """
    Solve the security inequality for the largest output length m.

    t, L and k all grow with m, so feasibility is monotone in m and the largest feasible m is
    found by bisection over [1, K].
    """
    variant = Variant(variant)
    K, epsilon, delta_knob = _resolve_inputs(N, K, b, epsilon, variant, knobs)
    solver = _Solver(N, K, b, epsilon, variant, knobs, delta_knob)

    first = solver.candidate(1)
    if not solver.feasible(1):
        terms = {name: float(value) for name, value in solver.terms(first).items()}
        reason = first.failure or "the numerator of the bound is below 1 + rho at m = 1"
        raise InfeasibleParametersError(f"No output length m >= 1 is feasible: {reason}", terms)

    m = solver.largest_m()
    cand = solver.candidate(m)
    notes = list(cand.notes)
    rho = cand.rho
    if solver.diagnostic:
        rho_source = "diagnostic"
    elif m <= knobs.budgets.design_verify_limit:
        design = build_design(knobs.design, cand.n, m)
        if design.rho_achieved > rho:
            raise DesignError(f"Measured rho {design.rho_achieved} exceeds the certified bound {rho}")
        rho = design.rho_achieved
        rho_source = "verified"
    else:
        rho_source = "certified"
        notes.append(f"m={m} is above the verification limit, rho is the certified degree bound")

    rho_target: Optional[float] = None
    if variant == Variant.RS_HADAMARD and knobs.gamma is not None:
        rho_target = float(K) ** (knobs.gamma / 2)
    elif variant == Variant.XOR:
        rho_target = 1.0

    radius = float(cand.radius)
    params = ExtractorParams(
        N=N,
        K=K,
        b=b,
        epsilon=epsilon,
        m=m,
        t=cand.t,
        n=cand.n,
        rho=rho,
        delta=radius,
        L=cand.L,
        entropy_delta=binary_entropy(radius),
        variant=variant,
        k=cand.k,
        constants=knobs.constants,
        design=knobs.design,
        rho_source=rho_source,
        rho_target=rho_target,
        delta_knob=float(delta_knob) if delta_knob is not None else None,
        field_width=cand.field_width,
        diagnostic=solver.diagnostic,
        notes=tuple(notes),
    )
    logger.info(
        "Solved %s parameters: m=%d t=%d n=%d rho=%s (%s)", variant.value, m, params.t, params.n, rho, rho_source
    )
    return params


def short_seed_preset(N: int, K: int, b: int, gamma: float, c: float = 1, **kwargs) -> ExtractorParams:
    """Reed-Solomon/Hadamard preset: epsilon = N^(-c), design ratio target K^(gamma/2)."""
    return compute_params(N, K, b, None, Variant.RS_HADAMARD, ParamKnobs(gamma=gamma, c=c, **kwargs))


def local_preset(N: int, alpha: float, delta: float, b: int, c: float = 1, **kwargs) -> ExtractorParams:
    """Locally computable preset: K = floor(alpha N), epsilon = N^(-c), XOR code."""
    return compute_params(N, None, b, None, Variant.XOR, ParamKnobs(alpha=alpha, delta=delta, c=c, **kwargs))


QFAC_FAMILIES = ("general", "rs_hadamard", "xor_k", "hadamard", "universal", "xor_arw")


def qfac_bound(
    N: int,
    b: float,
    epsilon: float,
    delta: float = 0,
    L: int = 1,
    family: str = "general",
    k: Optional[int] = None,
    constants: Constants = DEFAULT_CONSTANTS,
    diagnostic: bool = False,
) -> float:
    """Upper bound, in bits, on log |A| for a QFAC on average of b qubits and advantage epsilon."""
    if not 0 < epsilon <= 0.5:
        raise ParameterError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    if not 0 <= delta <= 0.5:
        raise ParameterError(f"delta must lie in [0, 1/2], got {delta}")
    if L < 1 or b < 0 or N < 1:
        raise ParameterError("qfac_bound needs L >= 1, b >= 0 and N >= 1")
    slack = 0.0 if diagnostic else constants.c_log * math.log2(1 / epsilon)
    if family == "general":
        return b + binary_entropy(delta) * N + math.log2(L) + slack
    if family == "rs_hadamard":
        return b + slack
    if family in ("xor_k", "xor_arw"):
        if k is None or k < 1:
            raise ParameterError(f"The {family} family needs a locality k >= 1")
        if family == "xor_arw":
            return b + (1 - (2 * epsilon) ** (2 / k) / (2 * math.log(2))) * N
        if exact_fraction(epsilon) <= Fraction(2 * k * k, 1 << N):
            raise ParameterError(f"The XOR bound needs epsilon > 2k^2 / 2^N, got epsilon={epsilon}")
        return b + binary_entropy(min(xor_list_radius(k, epsilon), 0.5)) * N + slack
    if family in ("hadamard", "universal"):
        return b + 2 * math.log2(1 / (2 * epsilon))
    raise ParameterError(f"Unknown family {family!r}, expected one of {QFAC_FAMILIES}")


def one_bit_entropy_threshold(N: int, delta: float, L: int, epsilon: float) -> float:
    """Min-entropy above which E(x, y) = C(x)_y is a strong one-bit extractor with error epsilon."""
    return binary_entropy(delta) * N + math.log2(L) + math.log2(2 / epsilon)


def one_bit_storage_error(log_support: float, K: float, b: float) -> float:
    """
    Error of the one-bit extractor on a flat source of log_support bits against b qubits, when K
    bits suffice classically: 3 sqrt(eta) with eta = 2^-(log|A| - b - K).
    """
    exponent = log_support - b - K
    if exponent < 0:
        raise ParameterError("The source support is too small for any storage guarantee")
    return 3 * math.sqrt(2.0**-exponent)
