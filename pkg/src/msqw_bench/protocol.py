"""Protocol runners, the gamma -> (alpha, beta) map, heuristic decay
schedules, and time-averaged metric estimation.

Within each QAOA stage the problem phase acts before the driver mixing
(the stage operator is exp(-i*alpha_j*H_d) exp(-i*beta_j*H_P), applied
right to left). Pinned here because a wrong order changes results.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import UsageError
from .model import DiagonalEnergies, GroundStateRecord, ground_state_indices
from .propagate import apply_driver_rotation, apply_mix, apply_phase
from .states import StateVector, make_plus_state

PROTOCOLS = ("msqw", "qaoa")
DECAY_KINDS = ("geometric", "linear")


@dataclass(frozen=True)
class MsqwSchedule:
    """Ordered (gamma_j, t_j) walk stages, optionally tagged with their decay origin."""

    stages: tuple[tuple[float, float], ...]
    decay: str = "explicit"
    gamma0: float | None = None
    delta_gamma: float | None = None
    clamped: bool = False

    def __post_init__(self):
        if len(self.stages) < 1:
            raise UsageError("schedule needs at least one stage")
        if any(g < 0 or t < 0 for g, t in self.stages):
            raise UsageError("all gamma_j and t_j must be non-negative")


@dataclass(frozen=True)
class QaoaSchedule:
    """Ordered (alpha_j, beta_j) angle stages."""

    stages: tuple[tuple[float, float], ...]
    decay: str = "explicit"
    gamma0: float | None = None
    delta_gamma: float | None = None
    clamped: bool = False

    def __post_init__(self):
        if len(self.stages) < 1:
            raise UsageError("schedule needs at least one stage")
        if any(a < 0 or b < 0 for a, b in self.stages):
            raise UsageError("all alpha_j and beta_j must be non-negative")


@dataclass(frozen=True)
class HeuristicScheduleParams:
    """Knobs of the decaying-gamma heuristic plus the runtime-sampling window."""

    gamma0: float
    delta_gamma: float
    p: int
    decay_kind: str = "geometric"
    t_min: float = 0.1
    t_max: float = 0.5
    samples: int = 2000

    def __post_init__(self):
        if self.p < 1:
            raise UsageError(f"p must be >= 1, got {self.p}")
        if self.decay_kind not in DECAY_KINDS:
            raise UsageError(f"decay_kind must be one of {DECAY_KINDS}, got {self.decay_kind!r}")
        if self.decay_kind == "geometric" and not 0.0 <= self.delta_gamma < 1.0:
            raise UsageError(f"geometric decay needs delta_gamma in [0, 1), got {self.delta_gamma}")
        if self.gamma0 < 0:
            raise UsageError(f"gamma0 must be non-negative, got {self.gamma0}")
        if not 0 < self.t_min <= self.t_max:
            raise UsageError(f"need 0 < t_min <= t_max, got [{self.t_min}, {self.t_max}]")
        if self.samples < 1:
            raise UsageError(f"samples must be >= 1, got {self.samples}")


@dataclass(frozen=True)
class MetricSample:
    """Expected problem energy and ground-state success probability of one run."""

    energy: float
    success_prob: float
    params: dict = field(default_factory=dict)
    seed: int | None = None
    energy_se: float = 0.0       # standard error of the mean (0 for deterministic runs)
    success_se: float = 0.0


def gamma_sequence(gamma0: float, delta_gamma: float, p: int, decay_kind: str) -> tuple[np.ndarray, bool]:
    """Per-stage hopping rates under the chosen decay; returns (gammas, clamped).

    geometric: gamma_{j+1} = gamma_j * (1 - delta_gamma)
    linear:    gamma_k = gamma0 - k * delta_gamma / gamma0, clamped at 0
    """
    k = np.arange(p, dtype=float)
    if decay_kind == "geometric":
        return gamma0 * (1.0 - delta_gamma) ** k, False
    if decay_kind == "linear":
        if gamma0 == 0.0:
            return np.zeros(p), False
        g = gamma0 - k * (delta_gamma / gamma0)
        clamped = bool(np.any(g < 0.0))
        return np.maximum(g, 0.0), clamped
    raise UsageError(f"decay_kind must be one of {DECAY_KINDS}, got {decay_kind!r}")


def map_gamma_to_qaoa(gamma: float, t: float) -> tuple[float, float]:
    """Angles with the walk's driver/problem ratio: alpha = gamma*t/(1+gamma), beta = t/(1+gamma).

    Guarantees alpha + beta = t and alpha/beta = gamma.
    """
    if gamma < 0:
        raise UsageError(f"gamma must be non-negative, got {gamma}")
    beta = t / (1.0 + gamma)
    return gamma * beta, beta


def build_heuristic_schedule(
    params: HeuristicScheduleParams, runtimes: Sequence[float]
) -> tuple[MsqwSchedule, QaoaSchedule]:
    """Decayed-gamma stages paired with their induced QAOA angles."""
    if len(runtimes) != params.p:
        raise UsageError(f"need {params.p} runtimes, got {len(runtimes)}")
    gammas, clamped = gamma_sequence(params.gamma0, params.delta_gamma, params.p, params.decay_kind)
    msqw_stages = tuple((float(g), float(t)) for g, t in zip(gammas, runtimes))
    qaoa_stages = tuple(map_gamma_to_qaoa(g, t) for g, t in msqw_stages)
    meta = dict(decay=params.decay_kind, gamma0=params.gamma0,
                delta_gamma=params.delta_gamma, clamped=clamped)
    return MsqwSchedule(msqw_stages, **meta), QaoaSchedule(qaoa_stages, **meta)


def run_msqw(diag: DiagonalEnergies, schedule: MsqwSchedule) -> StateVector:
    """Walk stages exp(-i*(gamma_j*H_d + H_P)*t_j) applied in order from |s>."""
    amps = make_plus_state(diag.n).amps
    for gamma, t in schedule.stages:
        amps = apply_mix(amps, diag, gamma, 1.0, t)
    return StateVector(diag.n, amps)


def run_qaoa(diag: DiagonalEnergies, schedule: QaoaSchedule) -> StateVector:
    """Alternating problem-phase / driver-rotation stages from |s>."""
    amps = make_plus_state(diag.n).amps
    for alpha, beta in schedule.stages:
        amps = apply_phase(amps, diag.energies, beta)
        amps = apply_driver_rotation(amps, diag.n, alpha)
    return StateVector(diag.n, amps)


def measure_metrics(state: StateVector, diag: DiagonalEnergies, gs: GroundStateRecord) -> MetricSample:
    """<H_P> and the success probability summed over all degenerate minimizers."""
    probs = state.probabilities()
    energy = float(diag.energies @ probs)
    success = float(probs[ground_state_indices(diag, gs)].sum())
    return MetricSample(energy=energy, success_prob=success)


# ---------------------------------------------------------------------------
# Time averaging. All samples of one estimate are evolved together as the
# columns of a (2**n, samples) block; per-sample runtimes enter as per-column
# durations, so the estimate costs a handful of dense matrix products.

def _ensemble_block(diag: DiagonalEnergies, samples: int) -> np.ndarray:
    dim = 1 << diag.n
    return np.full((dim, samples), 1.0 / np.sqrt(dim), dtype=np.complex128)


def evolve_ensemble(
    diag: DiagonalEnergies, protocol: str, gammas: Sequence[float], times: np.ndarray
) -> np.ndarray:
    """Evolve one column state per runtime tuple; times has shape (samples, p)."""
    if protocol not in PROTOCOLS:
        raise UsageError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    if times.ndim != 2 or times.shape[1] != len(gammas):
        raise UsageError(f"times must be (samples, {len(gammas)}), got {times.shape}")
    amps = _ensemble_block(diag, times.shape[0])
    for j, gamma in enumerate(gammas):
        tj = times[:, j]
        if protocol == "msqw":
            amps = apply_mix(amps, diag, float(gamma), 1.0, tj)
        else:
            beta = tj / (1.0 + gamma)
            amps = apply_phase(amps, diag.energies, beta)
            amps = apply_driver_rotation(amps, diag.n, gamma * beta)
    return amps


def draw_runtimes(rng: np.random.Generator, samples: int, p: int, t_min: float, t_max: float) -> np.ndarray:
    """Per-stage runtimes drawn i.i.d. uniform on [t_min, t_max], shape (samples, p)."""
    return rng.uniform(t_min, t_max, size=(samples, p))


def _mean_and_se(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    if values.size < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / np.sqrt(values.size))


def time_averaged_metrics(
    diag: DiagonalEnergies,
    gs: GroundStateRecord,
    protocol: str,
    gammas: Sequence[float],
    t_min: float,
    t_max: float,
    samples: int,
    seed,
) -> MetricSample:
    """Mean energy and success probability over uniformly sampled runtime tuples.

    One set of draws feeds both metrics; deterministic for a fixed seed.
    """
    if samples < 1:
        raise UsageError(f"samples must be >= 1, got {samples}")
    if not 0 < t_min <= t_max:
        raise UsageError(f"need 0 < t_min <= t_max, got [{t_min}, {t_max}]")
    rng = np.random.default_rng(seed)
    times = draw_runtimes(rng, samples, len(gammas), t_min, t_max)
    amps = evolve_ensemble(diag, protocol, gammas, times)
    probs = np.abs(amps) ** 2
    per_sample_energy = diag.energies @ probs
    per_sample_success = probs[ground_state_indices(diag, gs)].sum(axis=0)
    energy, energy_se = _mean_and_se(per_sample_energy)
    success, success_se = _mean_and_se(per_sample_success)
    return MetricSample(
        energy=energy,
        success_prob=success,
        params=dict(protocol=protocol, gammas=[float(g) for g in gammas],
                    t_min=t_min, t_max=t_max, samples=samples),
        seed=seed if isinstance(seed, int) else None,
        energy_se=energy_se,
        success_se=success_se,
    )


def stage_energy_trace(
    diag: DiagonalEnergies,
    gammas: Sequence[float],
    t_min: float,
    t_max: float,
    samples: int,
    seed,
    protocol: str = "msqw",
) -> np.ndarray:
    """Per-sample <H_P> after each stage, shape (p, samples).

    Used to check that the time-averaged energy is non-increasing across
    stage boundaries when gamma decays.
    """
    rng = np.random.default_rng(seed)
    times = draw_runtimes(rng, samples, len(gammas), t_min, t_max)
    amps = _ensemble_block(diag, samples)
    trace = np.empty((len(gammas), samples))
    for j, gamma in enumerate(gammas):
        tj = times[:, j]
        if protocol == "msqw":
            amps = apply_mix(amps, diag, float(gamma), 1.0, tj)
        elif protocol == "qaoa":
            beta = tj / (1.0 + gamma)
            amps = apply_phase(amps, diag.energies, beta)
            amps = apply_driver_rotation(amps, diag.n, gamma * beta)
        else:
            raise UsageError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
        trace[j] = diag.energies @ (np.abs(amps) ** 2)
    return trace


# ---------------------------------------------------------------------------
# Schedule JSON: {"protocol", "decay", "gamma0", "delta_gamma", "p", "stages"}.

def schedule_to_dict(schedule: MsqwSchedule | QaoaSchedule) -> dict:
    return {
        "protocol": "msqw" if isinstance(schedule, MsqwSchedule) else "qaoa",
        "decay": schedule.decay,
        "gamma0": schedule.gamma0,
        "delta_gamma": schedule.delta_gamma,
        "p": len(schedule.stages),
        "stages": [[a, b] for a, b in schedule.stages],
    }


def schedule_from_dict(d: dict) -> MsqwSchedule | QaoaSchedule:
    cls = {"msqw": MsqwSchedule, "qaoa": QaoaSchedule}.get(d.get("protocol"))
    if cls is None:
        raise UsageError(f"unknown protocol {d.get('protocol')!r} in schedule")
    stages = tuple((float(a), float(b)) for a, b in d["stages"])
    if len(stages) != int(d.get("p", len(stages))):
        raise UsageError("schedule p does not match the number of stages")
    return cls(
        stages,
        decay=d.get("decay", "explicit"),
        gamma0=d.get("gamma0"),
        delta_gamma=d.get("delta_gamma"),
        clamped=bool(d.get("clamped", False)),
    )


def schedule_to_json(schedule: MsqwSchedule | QaoaSchedule) -> str:
    return json.dumps(schedule_to_dict(schedule))


def schedule_from_json(text: str) -> MsqwSchedule | QaoaSchedule:
    return schedule_from_dict(json.loads(text))
