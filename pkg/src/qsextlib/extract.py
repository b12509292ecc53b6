import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Protocol, Union

import numpy as np

from .bits import BitsLike, CountingSource, as_bit_array, bits_to_int, int_to_bits
from .codes import CodeSpec, Message, bit_evaluator, encode_full
from .designs import WeakDesign, build_design
from .errors import DesignError, LengthMismatchError, ParameterError
from .params import ExtractorParams, Variant
from .settings import DEFAULT_BUDGETS, Budgets

logger = logging.getLogger("qsext")


@dataclass(frozen=True)
class ExtractorInstance:
    """
    Ext_C(x, y) = NW^{C(x)}(y): output bit i is C(x) read at the index formed by y restricted to S_i.

    Attributes:
        design: weak design whose set size is the code's index length
        code: the code back-end
        params: the solved parameters this instance realises, if any
    """

    design: WeakDesign
    code: CodeSpec
    params: Optional[ExtractorParams] = None

    def __post_init__(self):
        if self.design.n != self.code.index_bits:
            raise DesignError(
                f"Design set size {self.design.n} does not match the code index length {self.code.index_bits}"
            )
        if self.params is not None:
            p = self.params
            if (self.design.m, self.design.t, self.code.N) != (p.m, p.t, p.N):
                raise DesignError("Design or code does not match the solved parameters")
            if self.design.rho_achieved > p.rho:
                raise DesignError(f"Design ratio {self.design.rho_achieved} exceeds the ratio {p.rho} in the bound")

    @property
    def N(self) -> int:
        return self.code.N

    @property
    def t(self) -> int:
        return self.design.t

    @property
    def m(self) -> int:
        return self.design.m

    def seed_index(self, y: BitsLike, i: int) -> int:
        """y restricted to S_i; the smallest position of S_i is the least significant bit."""
        if i < 0 or i >= self.m:
            raise ParameterError(f"Output index {i} outside [0, {self.m})")
        return bits_to_int(np.asarray(y, dtype=np.uint8)[list(self.design.sets[i])])

    def output_table(self, messages: np.ndarray, budgets: Budgets = DEFAULT_BUDGETS) -> np.ndarray:
        """Outputs Ext(x, y) as integers, for every message row and every seed y in [0, 2^t)."""
        seeds = 1 << self.t
        weights = np.left_shift(1, np.arange(self.design.n, dtype=np.int64))
        seed_bits = np.array([int_to_bits(y, self.t) for y in range(seeds)], dtype=np.int64).reshape(seeds, self.t)
        # positions[y, i] is the codeword index read for output bit i under seed y
        positions = np.stack([seed_bits[:, list(s)] @ weights for s in self.design.sets], axis=1)
        out = np.zeros((len(messages), seeds), dtype=np.int64)
        for row, x in enumerate(messages):
            codeword = encode_full(self.code, x, budgets).astype(np.int64)
            out[row] = (codeword[positions] << np.arange(self.m, dtype=np.int64)).sum(axis=1)
        return out


def build_instance(params: ExtractorParams, design: Optional[WeakDesign] = None) -> ExtractorInstance:
    if params.variant == Variant.RS_HADAMARD:
        code = CodeSpec.rs_hadamard(params.N, width=params.field_width)
    else:
        assert params.k is not None
        code = CodeSpec.xor(params.N, params.k)
    if design is None:
        design = build_design(params.design, code.index_bits, params.m)
    instance = ExtractorInstance(design=design, code=code, params=params)
    logger.info("Assembled extractor N=%d t=%d m=%d over the %s code", instance.N, instance.t, instance.m, code.kind.value)
    return instance


def _seed_array(inst: ExtractorInstance, y: Union[BitsLike, int]) -> np.ndarray:
    if isinstance(y, (int, np.integer)):
        return int_to_bits(int(y), inst.t)
    return as_bit_array(y, inst.t, "seed")


def _message(inst: ExtractorInstance, x: Message) -> Message:
    if isinstance(x, CountingSource):
        if len(x) != inst.N:
            raise LengthMismatchError(f"source has {len(x)} bits, expected {inst.N}")
        return x
    return as_bit_array(x, inst.N, "source")


def nw_bit(inst: ExtractorInstance, x: Message, y: Union[BitsLike, int], i: int) -> int:
    seed = _seed_array(inst, y)
    return bit_evaluator(inst.code, _message(inst, x))(inst.seed_index(seed, i))


def _evaluate_chunk(inst: ExtractorInstance, x: Message, seed: np.ndarray, indices: range) -> np.ndarray:
    evaluate = bit_evaluator(inst.code, x)
    return np.array([evaluate(inst.seed_index(seed, i)) for i in indices], dtype=np.uint8)


def _chunks(m: int, workers: int) -> list[range]:
    workers = max(1, min(workers, m))
    size = -(-m // workers)
    return [range(start, min(start + size, m)) for start in range(0, m, size)]


def extract(inst: ExtractorInstance, x: Message, y: Union[BitsLike, int], workers: int = 1) -> np.ndarray:
    """The m output bits. Chunks run on a thread pool and are joined in output order."""
    bits, _ = _run(inst, x, y, workers, counted=False)
    return bits


@dataclass(frozen=True)
class LocalityCounters:
    """
    Attributes:
        reads: source-bit reads made while computing the output
        distinct: distinct source positions read
        output_bits: number of output bits computed
    """

    reads: int
    distinct: int
    output_bits: int

    @property
    def reads_per_output_bit(self) -> float:
        return self.reads / self.output_bits if self.output_bits else 0.0

    def to_json(self) -> dict[str, float]:
        return {
            "reads": self.reads,
            "distinct": self.distinct,
            "output_bits": self.output_bits,
            "reads_per_output_bit": self.reads_per_output_bit,
        }


def extract_with_counters(
    inst: ExtractorInstance, x: BitsLike, y: Union[BitsLike, int], workers: int = 1
) -> tuple[np.ndarray, LocalityCounters]:
    bits, counters = _run(inst, x, y, workers, counted=True)
    assert counters is not None
    return bits, counters


def _run(
    inst: ExtractorInstance, x: Message, y: Union[BitsLike, int], workers: int, counted: bool
) -> tuple[np.ndarray, Optional[LocalityCounters]]:
    source = _message(inst, x)
    seed = _seed_array(inst, y)
    chunks = _chunks(inst.m, workers)
    views: list[Message] = [CountingSource(source) for _ in chunks] if counted else [source for _ in chunks]
    if len(chunks) == 1:
        parts = [_evaluate_chunk(inst, views[0], seed, chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as executor:
            futures = [executor.submit(_evaluate_chunk, inst, view, seed, chunk) for view, chunk in zip(views, chunks)]
            parts = [future.result() for future in futures]
    bits = np.concatenate(parts)
    if not counted:
        return bits, None
    counting = [view for view in views if isinstance(view, CountingSource)]
    seen: set[int] = set()
    for view in counting:
        seen |= view.seen()
    counters = LocalityCounters(reads=sum(v.reads for v in counting), distinct=len(seen), output_bits=inst.m)
    logger.debug("Extracted %d bits with %d source reads", inst.m, counters.reads)
    return bits, counters


def one_bit_extract(code: CodeSpec, x: Message, y: int) -> int:
    """E(x, y) = C(x)_y."""
    return bit_evaluator(code, x)(y)


class Extractor(Protocol):
    """What the verification harness needs: sizes plus the full output table."""

    @property
    def N(self) -> int: ...

    @property
    def t(self) -> int: ...

    @property
    def m(self) -> int: ...

    def output_table(self, messages: np.ndarray, budgets: Budgets = DEFAULT_BUDGETS) -> np.ndarray: ...


class OneBitExtractor:
    """E(x, y) = C(x)_y with a seed of index_bits bits."""

    def __init__(self, code: CodeSpec):
        self.code = code

    @property
    def N(self) -> int:
        return self.code.N

    @property
    def t(self) -> int:
        return self.code.index_bits

    @property
    def m(self) -> int:
        return 1

    def output_table(self, messages: np.ndarray, budgets: Budgets = DEFAULT_BUDGETS) -> np.ndarray:
        return np.stack([encode_full(self.code, x, budgets).astype(np.int64) for x in messages])


class FunctionExtractor:
    """Wraps fn(x_bits, y) -> output integer; used for reference extractors such as constants and the identity."""

    def __init__(self, N: int, t: int, m: int, fn: Callable[[np.ndarray, int], int]):
        self._N = N
        self._t = t
        self._m = m
        self.fn = fn

    @property
    def N(self) -> int:
        return self._N

    @property
    def t(self) -> int:
        return self._t

    @property
    def m(self) -> int:
        return self._m

    def output_table(self, messages: np.ndarray, budgets: Budgets = DEFAULT_BUDGETS) -> np.ndarray:
        out = np.zeros((len(messages), 1 << self.t), dtype=np.int64)
        for row, x in enumerate(messages):
            for y in range(1 << self.t):
                value = int(self.fn(x, y))
                if value < 0 or value >> self.m:
                    raise ParameterError(f"Extractor output {value} does not fit in {self.m} bits")
                out[row, y] = value
        return out


def constant_extractor(N: int, t: int, m: int, value: int = 0) -> FunctionExtractor:
    return FunctionExtractor(N, t, m, lambda x, y: value)


def identity_extractor(N: int, t: int = 0) -> FunctionExtractor:
    return FunctionExtractor(N, t, N, lambda x, y: bits_to_int(x))
