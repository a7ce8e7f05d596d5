"""Sherrington-Kirkpatrick spin-glass instances and their energy tables.

Sign/bit convention: bit value 0 of the basis index is spin +1 (Z|0> = +|0>).
Couplings J_ab and fields h_b are drawn i.i.d. from a standard normal and
carry the coupling scale as the energy unit (set to 1 throughout).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ConfigurationError, UsageError
from .states import MAX_STATE_QUBITS, StateVector


@dataclass(frozen=True)
class SpinGlassInstance:
    n: int
    couplings: tuple[tuple[int, int, float], ...]  # (a, b, J_ab) with a < b
    fields: tuple[float, ...]
    id: str
    seed: int


@dataclass(frozen=True)
class DiagonalEnergies:
    """energies[z] is the classical cost of basis state z, for all 2**n states."""

    n: int
    energies: np.ndarray
    instance_id: str = ""


@dataclass(frozen=True)
class GroundStateRecord:
    instance_id: str
    z_star: int        # lowest index among minimizers
    e0: float
    e1: float          # first energy strictly above e0 (== e0 if spectrum is flat)
    degeneracy: int


def generate_instance(n: int, seed: int) -> SpinGlassInstance:
    """Draw a fully connected instance with normal(0, 1) couplings and fields.

    Sampling uses numpy's default_rng (PCG64) seeded with `seed`; the
    n(n-1)/2 couplings are drawn first in (a, b)-lexicographic order, then
    the n fields, so an instance is reproducible from (n, seed) alone.
    """
    if n < 2:
        raise UsageError(f"need at least 2 qubits, got {n}")
    if n > MAX_STATE_QUBITS:
        raise ConfigurationError(f"n={n} above the state cap {MAX_STATE_QUBITS}")
    rng = np.random.default_rng(seed)
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    js = rng.standard_normal(len(pairs))
    hs = rng.standard_normal(n)
    return SpinGlassInstance(
        n=n,
        couplings=tuple((a, b, float(j)) for (a, b), j in zip(pairs, js)),
        fields=tuple(float(h) for h in hs),
        id=f"sk-n{n}-s{seed}",
        seed=seed,
    )


def spin_table(n: int) -> np.ndarray:
    """(n, 2**n) array of +-1 spins; row b holds s_b(z) = 1 - 2*bit_b(z)."""
    z = np.arange(1 << n)
    return 1.0 - 2.0 * ((z[None, :] >> np.arange(n)[:, None]) & 1)


def build_diagonal(instance: SpinGlassInstance) -> DiagonalEnergies:
    """Energy of every basis state: E(z) = -sum_{a<b} J_ab s_a s_b - sum_b h_b s_b.

    Each unordered pair is stored once and contributes -J_ab s_a s_b, which
    absorbs the 1/2 of the symmetric double sum over a != b.
    """
    spins = spin_table(instance.n)
    energies = -(np.asarray(instance.fields) @ spins)
    for a, b, j in instance.couplings:
        energies = energies - j * spins[a] * spins[b]
    return DiagonalEnergies(n=instance.n, energies=energies, instance_id=instance.id)


def apply_driver(state: StateVector) -> StateVector:
    """Action of the transverse-field driver -sum_j X_j on a state.

    This is the operator application, not an evolution: the result is not
    normalized. out[z] = -sum_j in[z with bit j flipped].
    """
    n = state.n
    psi = state.amps.reshape((2,) * n)
    out = np.zeros_like(psi)
    for ax in range(n):
        out -= np.flip(psi, axis=ax)
    return StateVector(n, out.reshape(state.amps.shape))


def solve_ground_state(diag: DiagonalEnergies) -> GroundStateRecord:
    """Exhaustive scan of the energy table; ties at the minimum are counted."""
    e = diag.energies
    z_star = int(np.argmin(e))
    e0 = float(e[z_star])
    degeneracy = int(np.count_nonzero(e == e0))
    above = e[e > e0]
    e1 = float(above.min()) if above.size else e0
    return GroundStateRecord(diag.instance_id, z_star, e0, e1, degeneracy)


def ground_state_indices(diag: DiagonalEnergies, gs: GroundStateRecord) -> np.ndarray:
    """Basis indices of all states tied at the ground energy."""
    return np.flatnonzero(diag.energies == gs.e0)


# ---------------------------------------------------------------------------
# Instance file format: JSON Lines, one instance per line. Ground-truth
# fields stay null until a solve pass fills them.

def instance_to_dict(instance: SpinGlassInstance, gs: GroundStateRecord | None = None) -> dict:
    return {
        "id": instance.id,
        "n": instance.n,
        "seed": instance.seed,
        "couplings": [[a, b, j] for a, b, j in instance.couplings],
        "fields": list(instance.fields),
        "e0": gs.e0 if gs is not None else None,
        "z_star": gs.z_star if gs is not None else None,
        "degeneracy": gs.degeneracy if gs is not None else None,
    }


def instance_from_dict(d: dict) -> tuple[SpinGlassInstance, float | None]:
    """Returns the instance and the stored ground energy (None if unsolved)."""
    instance = SpinGlassInstance(
        n=int(d["n"]),
        couplings=tuple((int(a), int(b), float(j)) for a, b, j in d["couplings"]),
        fields=tuple(float(h) for h in d["fields"]),
        id=str(d["id"]),
        seed=int(d["seed"]),
    )
    e0 = d.get("e0")
    return instance, (float(e0) if e0 is not None else None)


def write_instances(path: str | Path, rows: Iterable[tuple[SpinGlassInstance, GroundStateRecord | None]]) -> None:
    with open(path, "w") as fh:
        for instance, gs in rows:
            fh.write(json.dumps(instance_to_dict(instance, gs)) + "\n")


def read_instances(path: str | Path) -> list[tuple[SpinGlassInstance, float | None]]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(instance_from_dict(json.loads(line)))
    return out
