import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from .bits import bits_to_int, int_to_bits
from .errors import SourceError

logger = logging.getLogger("qsext")

PROBABILITY_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class SourceDistribution:
    """
    An explicit distribution over {0,1}^N.

    Attributes:
        N: bit length
        support: (S, N) array of 0/1 rows, one per support string
        probabilities: probability of each row
        form: "flat" when every row carries 1/S, "table" otherwise
    """

    N: int
    support: np.ndarray
    probabilities: np.ndarray
    form: str = "table"

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.uint8)
        probabilities = np.asarray(self.probabilities, dtype=np.float64)
        if support.ndim != 2 or support.shape[1] != self.N:
            raise SourceError(f"Support must be an (S, {self.N}) bit array, got shape {support.shape}")
        if support.shape[0] == 0 or support.shape[0] != probabilities.shape[0]:
            raise SourceError("Support and probabilities must be non-empty and of equal length")
        if np.any(support > 1):
            raise SourceError("Support rows must only hold 0/1 values")
        if np.any(probabilities < 0):
            raise SourceError("Probabilities must be nonnegative")
        if abs(probabilities.sum() - 1) > PROBABILITY_TOLERANCE:
            raise SourceError(f"Probabilities sum to {probabilities.sum()!r}, not 1")
        if len({row.tobytes() for row in support}) != support.shape[0]:
            raise SourceError("Support rows must be distinct")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probabilities", probabilities)

    @classmethod
    def flat(cls, N: int, messages: Sequence[int]) -> "SourceDistribution":
        """Uniform over the given messages (bit i of each integer is x_i)."""
        support = np.array([int_to_bits(int(x), N) for x in messages], dtype=np.uint8).reshape(len(messages), N)
        probabilities = np.full(len(messages), 1 / len(messages)) if len(messages) else np.zeros(0)
        return cls(N, support, probabilities, form="flat")

    @classmethod
    def table(cls, N: int, entries: Sequence[tuple[int, float]]) -> "SourceDistribution":
        messages = [int(x) for x, _ in entries]
        support = np.array([int_to_bits(x, N) for x in messages], dtype=np.uint8).reshape(len(messages), N)
        return cls(N, support, np.array([p for _, p in entries], dtype=np.float64), form="table")

    @classmethod
    def uniform(cls, N: int) -> "SourceDistribution":
        return cls.flat(N, range(1 << N))

    @classmethod
    def point_mass(cls, N: int, x: int = 0) -> "SourceDistribution":
        return cls.flat(N, [x])

    @property
    def size(self) -> int:
        return int(self.support.shape[0])

    def messages(self) -> list[int]:
        return [bits_to_int(row) for row in self.support]

    def summary(self) -> dict[str, Any]:
        return {"N": self.N, "form": self.form, "support_size": self.size, "min_entropy": min_entropy(self)}


def random_flat(N: int, K: int, rng: Optional[np.random.Generator] = None) -> SourceDistribution:
    """Flat source on 2^K distinct strings drawn without replacement from {0,1}^N."""
    if K < 0 or K > N:
        raise SourceError(f"A flat source needs 0 <= K <= N, got K={K} N={N}")
    rng = rng if rng is not None else np.random.default_rng()
    messages = rng.choice(1 << N, size=1 << K, replace=False)
    return SourceDistribution.flat(N, sorted(int(x) for x in messages))


def min_entropy(src: SourceDistribution) -> float:
    """-log2 of the largest probability."""
    top = float(np.max(src.probabilities))
    if top <= 0:
        raise SourceError("Distribution has no mass")
    return math.log2(1 / top)
