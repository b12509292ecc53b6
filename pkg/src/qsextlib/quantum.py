import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import AdversaryError

logger = logging.getLogger("qsext")

TOLERANCE = 1e-9

StorageMap = Callable[[int], np.ndarray]
Distinguisher = Callable[[int, int], tuple[np.ndarray, np.ndarray]]


def check_density_matrix(rho: np.ndarray, dimension: int, what: str = "state"):
    if rho.shape != (dimension, dimension):
        raise AdversaryError(f"{what} has shape {rho.shape}, expected {(dimension, dimension)}")
    if np.max(np.abs(rho - rho.conj().T)) > TOLERANCE:
        raise AdversaryError(f"{what} is not Hermitian")
    if abs(np.trace(rho) - 1) > TOLERANCE:
        raise AdversaryError(f"{what} has trace {np.trace(rho).real:.12g}, not 1")
    if np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)) < -TOLERANCE:
        raise AdversaryError(f"{what} is not positive semidefinite")


def check_measurement(m0: np.ndarray, m1: np.ndarray, dimension: int, what: str = "measurement"):
    total = m0.conj().T @ m0 + m1.conj().T @ m1
    if total.shape != (dimension, dimension) or np.max(np.abs(total - np.eye(dimension))) > TOLERANCE:
        raise AdversaryError(f"{what} does not satisfy M0^dag M0 + M1^dag M1 = Id")


@dataclass(frozen=True)
class QuantumAdversary:
    """
    A b-qubit storage map x -> Psi(x), with an optional measurement strategy.

    Attributes:
        b: qubits of storage, the states are 2^b x 2^b
        storage: message integer (bit i is x_i) -> density matrix
        distinguisher: (output u, seed y) -> (M0, M1), a two-outcome measurement
        name: label used in reports
    """

    b: int
    storage: StorageMap
    distinguisher: Optional[Distinguisher] = None
    name: str = "adversary"

    @property
    def dimension(self) -> int:
        return 1 << self.b

    def state(self, x: int) -> np.ndarray:
        return np.asarray(self.storage(x), dtype=np.complex128)

    def states(self, messages: Sequence[int]) -> np.ndarray:
        return np.stack([self.state(x) for x in messages])

    def validate(self, messages: Iterable[int], m: Optional[int] = None, t: Optional[int] = None):
        for x in messages:
            check_density_matrix(self.state(x), self.dimension, f"Psi({x})")
        if self.distinguisher is not None and m is not None and t is not None:
            for u in range(1 << m):
                for y in range(1 << t):
                    m0, m1 = self.distinguisher(u, y)
                    check_measurement(np.asarray(m0), np.asarray(m1), self.dimension, f"M_({u},{y})")


def basis_state(index: int, dimension: int) -> np.ndarray:
    rho = np.zeros((dimension, dimension), dtype=np.complex128)
    rho[index, index] = 1
    return rho


def embed_classical_adversary(f: Callable[[int], int], b: int, name: str = "classical") -> QuantumAdversary:
    """Psi(x) = |f(x)><f(x)|, b bits of classical storage written as a diagonal state."""
    dimension = 1 << b

    def storage(x: int) -> np.ndarray:
        w = int(f(x))
        if w < 0 or w >= dimension:
            raise AdversaryError(f"f({x}) = {w} does not fit in {b} bits")
        return basis_state(w, dimension)

    return QuantumAdversary(b=b, storage=storage, name=name)


def constant_adversary(b: int, sigma: Optional[np.ndarray] = None) -> QuantumAdversary:
    """Psi(x) = sigma for every x; the maximally mixed state by default."""
    dimension = 1 << b
    state = np.eye(dimension, dtype=np.complex128) / dimension if sigma is None else np.asarray(sigma, np.complex128)
    check_density_matrix(state, dimension, "sigma")
    return QuantumAdversary(b=b, storage=lambda x: state, name="constant")


def random_adversary(b: int, seed: int) -> QuantumAdversary:
    """Psi(x) = |v_x><v_x| with v_x a pseudo-random unit vector derived from (seed, x) alone."""
    dimension = 1 << b

    def storage(x: int) -> np.ndarray:
        rng = np.random.default_rng([seed, x])
        v = rng.standard_normal(dimension) + 1j * rng.standard_normal(dimension)
        v /= np.linalg.norm(v)
        return np.outer(v, v.conj())

    return QuantumAdversary(b=b, storage=storage, name=f"random(seed={seed})")


@dataclass(frozen=True, eq=False)
class CqState:
    """
    A classical-quantum state sum_r |r><r| (x) blocks[r], kept block by block.

    Attributes:
        blocks: (R, D, D) array, block r is the (subnormalised) quantum part paired with register value r
    """

    blocks: np.ndarray

    @property
    def registers(self) -> int:
        return int(self.blocks.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.blocks.shape[0] * self.blocks.shape[1])

    def trace(self) -> float:
        return float(np.einsum("rii->", self.blocks).real)

    def matrix(self) -> np.ndarray:
        """The full block-diagonal density matrix."""
        r, d, _ = self.blocks.shape
        full = np.zeros((r * d, r * d), dtype=np.complex128)
        for i in range(r):
            full[i * d : (i + 1) * d, i * d : (i + 1) * d] = self.blocks[i]
        return full

    def check(self):
        if abs(self.trace() - 1) > TOLERANCE:
            raise AdversaryError(f"cq-state has trace {self.trace():.12g}, not 1")
        if np.max(np.abs(self.blocks - np.conj(np.swapaxes(self.blocks, 1, 2))), initial=0) > TOLERANCE:
            raise AdversaryError("cq-state is not Hermitian")


def trace_distance(a: CqState, b: CqState) -> float:
    """Half the trace norm of a - b, from the eigenvalues of each Hermitian block."""
    if a.blocks.shape != b.blocks.shape:
        raise AdversaryError(f"Cannot compare cq-states of shapes {a.blocks.shape} and {b.blocks.shape}")
    difference = a.blocks - b.blocks
    adjoint = np.conj(np.swapaxes(difference, 1, 2))
    if np.max(np.abs(difference - adjoint), initial=0) > TOLERANCE:
        raise AdversaryError("Difference of cq-states is not Hermitian")
    eigenvalues = np.linalg.eigvalsh((difference + adjoint) / 2)
    return float(np.abs(eigenvalues).sum() / 2)
