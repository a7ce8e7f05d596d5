"""Complex state vectors and dense operators on n qubits.

Amplitudes are stored as a flat array indexed by the integer value of the
bit string; bit b of the index is the measurement outcome of qubit b, so
single-bit-flip neighbours differ by one bit in the index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, UsageError

MAX_STATE_QUBITS = 14  # 16384 amplitudes
MAX_DENSE_QUBITS = 8   # 256 x 256 operators


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over the 2**n computational basis states.

    Treated as immutable after construction; operations return new states.
    """

    n: int
    amps: np.ndarray

    def __post_init__(self):
        if self.amps.shape != (1 << self.n,):
            raise UsageError(
                f"expected {1 << self.n} amplitudes for n={self.n}, got shape {self.amps.shape}"
            )

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


@dataclass(frozen=True)
class DenseUnitary:
    """Full 2**n x 2**n matrix of a propagator (columns = propagated basis states)."""

    n: int
    entries: np.ndarray

    def unitarity_error(self) -> float:
        """Max-abs deviation of U^dag U from the identity."""
        dim = 1 << self.n
        return float(np.max(np.abs(self.entries.conj().T @ self.entries - np.eye(dim))))


def make_plus_state(n: int) -> StateVector:
    """Equal superposition of all n-bit strings, every amplitude 2**(-n/2)."""
    if not 1 <= n <= MAX_STATE_QUBITS:
        raise ConfigurationError(f"n must be in [1, {MAX_STATE_QUBITS}], got {n}")
    dim = 1 << n
    return StateVector(n, np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128))


def basis_state(n: int, z: int) -> StateVector:
    """Computational basis state |z>."""
    if not 1 <= n <= MAX_STATE_QUBITS:
        raise ConfigurationError(f"n must be in [1, {MAX_STATE_QUBITS}], got {n}")
    if not 0 <= z < (1 << n):
        raise UsageError(f"basis index {z} out of range for n={n}")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[z] = 1.0
    return StateVector(n, amps)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.n != b.n:
        raise UsageError(f"qubit counts differ: {a.n} vs {b.n}")
    return complex(np.vdot(a.amps, b.amps))


def spectral_norm(m: np.ndarray) -> float:
    """Largest singular value of a square complex matrix (dimension <= 256)."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise UsageError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > (1 << MAX_DENSE_QUBITS):
        raise ConfigurationError(
            f"matrix dimension {m.shape[0]} above the dense cap {1 << MAX_DENSE_QUBITS}"
        )
    return float(np.linalg.svd(m, compute_uv=False)[0])
