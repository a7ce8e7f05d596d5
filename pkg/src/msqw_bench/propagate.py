"""Time-evolution operators: diagonal phase, factorized driver rotation,
exact quantum-walk exponential, and the stepped annealing reference.

Sign conventions (a silent sign error here flips interference):
  driver Hamiltonian H_d = -sum_j X_j, so exp(-i*alpha*H_d) = prod_j exp(+i*alpha*X_j);
  the quantum-walk generator is gamma*H_d + H_P and the annealing generator
  is a(s)*H_d + b(s)*H_P with s = t / t_total.

The array-level apply_* functions accept a single amplitude vector of shape
(2**n,) or a batch of column states of shape (2**n, k); the per-run duration
arguments may be scalars or length-k vectors. This is what makes the
time-averaging loops and dense-unitary builds cheap.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, UsageError
from .model import DiagonalEnergies
from .states import MAX_DENSE_QUBITS, DenseUnitary, StateVector

MAX_QW_QUBITS = 12  # dense diagonalization cap for the walk exponential

# Eigendecompositions of a*H_d + b*diag(E), keyed per (energy table, a, b).
# Insertion is idempotent (same key always maps to the same decomposition);
# lookups are lock-free, but eviction must not race, so all mutation holds
# the lock.
_EIG_CACHE: dict = {}
_EIG_CACHE_MAX = 128
_EIG_LOCK = threading.Lock()


@dataclass(frozen=True)
class AnnealSchedule:
    """Coefficient functions a(s), b(s) on normalized time s in [0, 1].

    The functions must accept numpy arrays (used for segment averaging).
    """

    a_fn: Callable
    b_fn: Callable
    t_total: float
    label: str = "custom"

    @staticmethod
    def linear_ramp(t_total: float = 2.0) -> "AnnealSchedule":
        """Conventional ramp a(s) = 1 - s, b(s) = s."""
        return AnnealSchedule(lambda s: 1.0 - s, lambda s: np.asarray(s) + 0.0, t_total, "linear-ramp")

    @staticmethod
    def constant(a: float, b: float, t_total: float) -> "AnnealSchedule":
        return AnnealSchedule(
            lambda s: np.full_like(np.asarray(s, dtype=float), a),
            lambda s: np.full_like(np.asarray(s, dtype=float), b),
            t_total,
            f"constant(a={a}, b={b})",
        )


def dense_driver(n: int) -> np.ndarray:
    """-sum_j X_j as a dense real matrix: -1 between indices differing in one bit."""
    dim = 1 << n
    h = np.zeros((dim, dim))
    idx = np.arange(dim)
    for j in range(n):
        h[idx, idx ^ (1 << j)] = -1.0
    return h


def dense_hamiltonian(diag: DiagonalEnergies, a: float, b: float) -> np.ndarray:
    """Dense real symmetric matrix of a*H_d + b*H_P."""
    h = a * dense_driver(diag.n)
    idx = np.arange(1 << diag.n)
    h[idx, idx] = b * diag.energies
    return h


def _mix_eig(diag: DiagonalEnergies, a: float, b: float, cache: bool):
    key = (id(diag.energies), float(a), float(b))
    if cache:
        hit = _EIG_CACHE.get(key)
        if hit is not None and hit[0] is diag.energies:
            return hit[1], hit[2]
    evals, evecs = np.linalg.eigh(dense_hamiltonian(diag, a, b))
    if cache:
        with _EIG_LOCK:
            while len(_EIG_CACHE) >= _EIG_CACHE_MAX:
                _EIG_CACHE.pop(next(iter(_EIG_CACHE)))
            # keep a reference to the energy array so the id() key stays valid
            _EIG_CACHE[key] = (diag.energies, evals, evecs)
    return evals, evecs


def apply_phase(amps: np.ndarray, energies: np.ndarray, beta) -> np.ndarray:
    """exp(-i*beta*E_z) on every amplitude; beta scalar or per-column vector."""
    beta = np.asarray(beta, dtype=float)
    if amps.ndim == 2 and beta.ndim == 1:
        return amps * np.exp(-1j * np.multiply.outer(energies, beta))
    return amps * (np.exp(-1j * beta * energies)[:, None] if amps.ndim == 2 else np.exp(-1j * beta * energies))


def apply_driver_rotation(amps: np.ndarray, n: int, alpha) -> np.ndarray:
    """exp(-i*alpha*H_d) as n commuting single-qubit rotations.

    Per qubit: out = cos(alpha)*psi + i*sin(alpha)*flip_j(psi). Exact.
    """
    alpha = np.asarray(alpha, dtype=float)
    batch = amps.shape[1:] if amps.ndim == 2 else ()
    psi = amps.reshape((2,) * n + batch)
    c, s = np.cos(alpha), 1j * np.sin(alpha)
    for ax in range(n):
        psi = c * psi + s * np.flip(psi, axis=ax)
    return psi.reshape(amps.shape)


def apply_mix(amps: np.ndarray, diag: DiagonalEnergies, a: float, b: float, t, cache: bool = True) -> np.ndarray:
    """exp(-i*(a*H_d + b*H_P)*t) via dense Hermitian eigendecomposition.

    t may be a scalar or a per-column vector; the decomposition only depends
    on (a, b) so it is shared across all columns and cached for reuse.
    """
    evals, evecs = _mix_eig(diag, a, b, cache)
    t = np.asarray(t, dtype=float)
    w = evecs.T @ amps
    if amps.ndim == 2 and t.ndim == 1:
        w = w * np.exp(-1j * np.multiply.outer(evals, t))
    else:
        w = w * (np.exp(-1j * t * evals)[:, None] if amps.ndim == 2 else np.exp(-1j * t * evals))
    return evecs @ w


def apply_anneal(amps: np.ndarray, diag: DiagonalEnergies, schedule: AnnealSchedule, steps: int) -> np.ndarray:
    """Piecewise-constant evolution of a(s)H_d + b(s)H_P with midpoint coefficients.

    Each sub-step is itself an exact unitary walk step, so the only error is
    the O(dt^2) midpoint error, controlled by doubling `steps`.
    """
    if steps < 1:
        raise UsageError(f"steps must be >= 1, got {steps}")
    dt = schedule.t_total / steps
    mids = (np.arange(steps) + 0.5) / steps
    a_mid = np.asarray(schedule.a_fn(mids), dtype=float)
    b_mid = np.asarray(schedule.b_fn(mids), dtype=float)
    out = amps
    for m in range(steps):
        out = apply_mix(out, diag, float(a_mid[m]), float(b_mid[m]), dt, cache=False)
    return out


# ---------------------------------------------------------------------------
# StateVector-level wrappers.

def phase_propagate(state: StateVector, diag: DiagonalEnergies, beta: float) -> StateVector:
    """Diagonal phase evolution exp(-i*beta*H_P)|psi>; exact."""
    if not np.isfinite(beta):
        raise UsageError(f"beta must be finite, got {beta}")
    return StateVector(state.n, apply_phase(state.amps, diag.energies, beta))


def driver_propagate(state: StateVector, alpha: float) -> StateVector:
    """Driver evolution exp(-i*alpha*H_d)|psi>; exact (the X_j commute)."""
    if not np.isfinite(alpha):
        raise UsageError(f"alpha must be finite, got {alpha}")
    return StateVector(state.n, apply_driver_rotation(state.amps, state.n, alpha))


def qw_propagate(state: StateVector, diag: DiagonalEnergies, gamma: float, t: float) -> StateVector:
    """Quantum-walk evolution exp(-i*(gamma*H_d + H_P)*t)|psi>."""
    if state.n > MAX_QW_QUBITS:
        raise ConfigurationError(f"n={state.n} above the dense-diagonalization cap {MAX_QW_QUBITS}")
    if gamma < 0 or t < 0:
        raise UsageError(f"gamma and t must be non-negative, got gamma={gamma}, t={t}")
    return StateVector(state.n, apply_mix(state.amps, diag, gamma, 1.0, t))


def mix_propagate(state: StateVector, diag: DiagonalEnergies, a: float, b: float, t: float) -> StateVector:
    """Evolution under the general combination a*H_d + b*H_P for time t."""
    if state.n > MAX_QW_QUBITS:
        raise ConfigurationError(f"n={state.n} above the dense-diagonalization cap {MAX_QW_QUBITS}")
    return StateVector(state.n, apply_mix(state.amps, diag, a, b, t))


def anneal_propagate(state: StateVector, diag: DiagonalEnergies, schedule: AnnealSchedule, steps: int) -> StateVector:
    """Midpoint-rule stepped approximation of the time-ordered annealing evolution."""
    return StateVector(state.n, apply_anneal(state.amps, diag, schedule, steps))


def build_dense_unitary(n: int, apply_fn: Callable[[np.ndarray], np.ndarray]) -> DenseUnitary:
    """Full matrix of a propagator, built by propagating all 2**n basis states.

    apply_fn maps a (2**n, k) block of column states to its evolved block;
    the columns of apply_fn(I) are the propagated basis vectors.
    """
    if n > MAX_DENSE_QUBITS:
        raise ConfigurationError(f"n={n} above the dense-unitary cap {MAX_DENSE_QUBITS}")
    dim = 1 << n
    return DenseUnitary(n, apply_fn(np.eye(dim, dtype=np.complex128)))
