from collections.abc import Sequence
from typing import Union

import numpy as np

from .errors import LengthMismatchError, ParameterError

BitsLike = Union[Sequence[int], np.ndarray]


def int_to_bits(value: int, length: int) -> np.ndarray:
    """Bit i of the result is bit i of value (least significant first)."""
    if value < 0 or value >> length:
        raise ParameterError(f"{value} does not fit in {length} bits")
    if length == 0:
        return np.zeros(0, dtype=np.uint8)
    raw = np.frombuffer(value.to_bytes((length + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:length]


def bits_to_int(bits: BitsLike) -> int:
    arr = np.asarray(bits, dtype=np.uint8)
    packed = np.packbits(arr, bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def as_bit_array(bits: BitsLike, length: int, what: str = "bit string") -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1 or arr.shape[0] != length:
        raise LengthMismatchError(f"{what} has {arr.size} bits, expected {length}")
    if np.any(arr > 1):
        raise ParameterError(f"{what} must only hold 0/1 values")
    return arr


def bytes_to_bits(data: bytes, length: int) -> np.ndarray:
    """Unpack the first `length` bits of data, least significant bit of each byte first."""
    if len(data) * 8 < length:
        raise LengthMismatchError(f"input holds {len(data) * 8} bits, need {length}")
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")[:length]


def bits_to_bytes(bits: BitsLike) -> bytes:
    """Pack bits least significant first; the final byte is zero padded."""
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


class CountingSource:
    """
    Read-only view of a bit array that counts the reads made through it.

    Attributes:
        reads: number of item reads
        distinct: number of distinct positions read so far
    """

    def __init__(self, bits: BitsLike):
        self._bits = np.asarray(bits, dtype=np.uint8)
        self._seen: set[int] = set()
        self.reads = 0

    def __len__(self) -> int:
        return int(self._bits.shape[0])

    def __getitem__(self, index: int) -> int:
        self.reads += 1
        self._seen.add(index)
        return int(self._bits[index])

    @property
    def distinct(self) -> int:
        return len(self._seen)

    def seen(self) -> set[int]:
        return set(self._seen)

    def reset(self):
        self.reads = 0
        self._seen.clear()
