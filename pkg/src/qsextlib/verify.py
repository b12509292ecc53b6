import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
from rich.progress import track
from typing_extensions import TypedDict

from .codes import CodeSpec
from .errors import BudgetExceededError, ParameterError
from .extract import Extractor, OneBitExtractor
from .quantum import TOLERANCE, CqState, QuantumAdversary, trace_distance
from .settings import DEFAULT_BUDGETS, DEFAULT_CONSTANTS, Budgets, Constants
from .sources import SourceDistribution, random_flat

logger = logging.getLogger("qsext")


class DistanceReport(TypedDict):
    instance: dict[str, int]
    source: dict[str, Any]
    distance: float
    budget_used: int
    budget: int
    tolerance: float
    constants: dict[str, float]


class QuantumDistanceReport(DistanceReport):
    adversary: dict[str, Any]


def _check_sizes(ext: Extractor, src: SourceDistribution):
    if ext.N != src.N:
        raise ParameterError(f"Source has {src.N} bits but the extractor expects {ext.N}")


def _require(required: int, budget: int, what: str):
    if required > budget:
        logger.warning("Refusing %s: %d units needed, budget %d", what, required, budget)
        raise BudgetExceededError(required, budget, what)


def classical_budget(ext: Extractor, src: SourceDistribution) -> int:
    """Extractor evaluations plus joint-table cells."""
    return src.size * (1 << ext.t) + (1 << (ext.m + ext.t))


def _joint_histogram(ext: Extractor, src: SourceDistribution, budgets: Budgets) -> np.ndarray:
    """hist[u, y] = Pr_x[Ext(x, y) = u]."""
    outputs = ext.output_table(src.support, budgets)
    seeds = 1 << ext.t
    hist = np.zeros((1 << ext.m, seeds), dtype=np.float64)
    columns = np.broadcast_to(np.arange(seeds), outputs.shape)
    weights = np.broadcast_to(src.probabilities[:, None], outputs.shape)
    np.add.at(hist, (outputs.ravel(), columns.ravel()), weights.ravel())
    return hist


def classical_distance(ext: Extractor, src: SourceDistribution, budgets: Budgets = DEFAULT_BUDGETS) -> float:
    """Statistical distance between (Ext(X, Y), Y) and the uniform distribution on m + t bits."""
    _check_sizes(ext, src)
    _require(classical_budget(ext, src), budgets.enumeration, "classical enumeration")
    hist = _joint_histogram(ext, src, budgets)
    # 1/2 sum_{u,y} |2^-t hist[u,y] - 2^-(m+t)|
    return float(np.abs(hist - 2.0**-ext.m).sum() / 2 ** (ext.t + 1))


def classical_distance_report(
    ext: Extractor,
    src: SourceDistribution,
    budgets: Budgets = DEFAULT_BUDGETS,
    constants: Constants = DEFAULT_CONSTANTS,
) -> DistanceReport:
    return {
        "instance": {"N": ext.N, "t": ext.t, "m": ext.m},
        "source": src.summary(),
        "distance": classical_distance(ext, src, budgets),
        "budget_used": classical_budget(ext, src),
        "budget": budgets.enumeration,
        "tolerance": TOLERANCE,
        "constants": constants.to_dict(),
    }


def _storage_states(adv: QuantumAdversary, src: SourceDistribution) -> np.ndarray:
    messages = src.messages()
    adv.validate(messages)
    return adv.states(messages)


def quantum_budget(ext: Extractor, src: SourceDistribution, adv: QuantumAdversary) -> int:
    """The classical count plus one 2^b x 2^b block per (output, seed) register."""
    return classical_budget(ext, src) + (1 << (ext.m + ext.t)) * adv.dimension**2


def cq_states(
    ext: Extractor, src: SourceDistribution, adv: QuantumAdversary, budgets: Budgets = DEFAULT_BUDGETS
) -> tuple[CqState, CqState]:
    """
    The real state Ext(X, U_t) o Psi(X) o U_t and the ideal state U_m o Psi(X) o U_t, with the
    classical registers (u, y) flattened to u * 2^t + y.
    """
    _check_sizes(ext, src)
    _require(quantum_budget(ext, src, adv), budgets.enumeration, "quantum enumeration")
    psi = _storage_states(adv, src)
    outputs = ext.output_table(src.support, budgets)
    outcomes = 1 << ext.m
    seeds = 1 << ext.t
    # weights[x, u, y] = p_x [Ext(x, y) = u]
    weights = np.zeros((src.size, outcomes, seeds), dtype=np.float64)
    rows = np.repeat(np.arange(src.size), seeds)
    cols = np.tile(np.arange(seeds), src.size)
    weights[rows, outputs.ravel(), cols] = src.probabilities[rows]
    real = np.einsum("xuy,xij->uyij", weights, psi) / seeds
    average = np.einsum("x,xij->ij", src.probabilities, psi)
    ideal = np.broadcast_to(average / (outcomes * seeds), real.shape)
    d = adv.dimension
    real_state = CqState(real.reshape(outcomes * seeds, d, d))
    ideal_state = CqState(np.array(ideal).reshape(outcomes * seeds, d, d))
    real_state.check()
    ideal_state.check()
    return real_state, ideal_state


def quantum_distance(
    ext: Extractor, src: SourceDistribution, adv: QuantumAdversary, budgets: Budgets = DEFAULT_BUDGETS
) -> float:
    """Trace distance between the extractor's output and a uniform output, both next to Psi(X) and the seed."""
    real, ideal = cq_states(ext, src, adv, budgets)
    return trace_distance(real, ideal)


def quantum_distance_report(
    ext: Extractor,
    src: SourceDistribution,
    adv: QuantumAdversary,
    budgets: Budgets = DEFAULT_BUDGETS,
    constants: Constants = DEFAULT_CONSTANTS,
) -> QuantumDistanceReport:
    return {
        "instance": {"N": ext.N, "t": ext.t, "m": ext.m},
        "source": src.summary(),
        "distance": quantum_distance(ext, src, adv, budgets),
        "budget_used": quantum_budget(ext, src, adv),
        "budget": budgets.enumeration,
        "tolerance": TOLERANCE,
        "constants": constants.to_dict(),
        "adversary": {"name": adv.name, "b": adv.b, "measurement": adv.distinguisher is not None},
    }


def classical_storage_distance(
    ext: Extractor, src: SourceDistribution, f: Callable[[int], int], b: int, budgets: Budgets = DEFAULT_BUDGETS
) -> float:
    """Statistical distance of (Ext(X, Y), Y, f(X)) from (U_m, Y, f(X)) for b-bit classical side information."""
    _check_sizes(ext, src)
    _require(classical_budget(ext, src) * (1 << b), budgets.enumeration, "classical side-information enumeration")
    outputs = ext.output_table(src.support, budgets)
    seeds = 1 << ext.t
    stored = np.array([int(f(x)) for x in src.messages()], dtype=np.int64)
    if np.any(stored < 0) or np.any(stored >= 1 << b):
        raise ParameterError(f"Side information does not fit in {b} bits")
    joint = np.zeros((1 << ext.m, seeds, 1 << b), dtype=np.float64)
    marginal = np.zeros(1 << b, dtype=np.float64)
    for row in range(src.size):
        p = src.probabilities[row]
        joint[outputs[row], np.arange(seeds), stored[row]] += p / seeds
        marginal[stored[row]] += p
    ideal = marginal[None, None, :] / ((1 << ext.m) * seeds)
    return float(np.abs(joint - ideal).sum() / 2)


def distinguisher_advantage(
    ext: Extractor, src: SourceDistribution, adv: QuantumAdversary, budgets: Budgets = DEFAULT_BUDGETS
) -> float:
    """|Pr_real[outcome 1] - Pr_ideal[outcome 1]| for the adversary's own measurement family."""
    if adv.distinguisher is None:
        raise ParameterError(f"Adversary {adv.name} has no distinguisher")
    adv.validate([], ext.m, ext.t)
    real, ideal = cq_states(ext, src, adv, budgets)
    seeds = 1 << ext.t
    advantage = 0.0
    for register in range(real.registers):
        u, y = divmod(register, seeds)
        _, m1 = adv.distinguisher(u, y)
        effect = np.asarray(m1).conj().T @ np.asarray(m1)
        advantage += float(np.trace(effect @ (real.blocks[register] - ideal.blocks[register])).real)
    return abs(advantage)


@dataclass
class OneBitScanReport:
    """
    Attributes:
        code: the code under test
        K: min-entropy of every sampled flat source
        epsilon: pass threshold on the distance
        distances: measured distance per trial
    """

    code: CodeSpec
    K: int
    epsilon: float
    distances: list[float] = field(default_factory=list)

    @property
    def max_distance(self) -> float:
        return max(self.distances) if self.distances else 0.0

    @property
    def mean_distance(self) -> float:
        return float(np.mean(self.distances)) if self.distances else 0.0

    @property
    def passed(self) -> bool:
        return self.max_distance <= self.epsilon

    def to_json(self) -> dict[str, Any]:
        return {
            "code": self.code.to_json(),
            "K": self.K,
            "epsilon": self.epsilon,
            "trials": len(self.distances),
            "max_distance": self.max_distance,
            "mean_distance": self.mean_distance,
            "passed": self.passed,
        }


def one_bit_security_scan(
    code: CodeSpec,
    K: int,
    epsilon: float,
    trials: int,
    seed: Optional[int] = 0,
    budgets: Budgets = DEFAULT_BUDGETS,
    progress: bool = False,
) -> OneBitScanReport:
    """Measure the one-bit extractor E(x, y) = C(x)_y on `trials` random flat sources of min-entropy K."""
    ext = OneBitExtractor(code)
    _require((1 << K) * (1 << ext.t) + (1 << (1 + ext.t)), budgets.enumeration, "one-bit scan")
    rng = np.random.default_rng(seed)
    report = OneBitScanReport(code=code, K=K, epsilon=epsilon)
    steps = range(trials)
    for _ in track(steps, description="Scanning flat sources...") if progress else steps:
        src = random_flat(code.N, K, rng)
        report.distances.append(classical_distance(ext, src, budgets))
    logger.info(
        "One-bit scan over %d sources of min-entropy %d: max %.6g, mean %.6g",
        trials,
        K,
        report.max_distance,
        report.mean_distance,
    )
    return report
