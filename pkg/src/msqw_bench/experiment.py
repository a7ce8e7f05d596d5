"""Numerical studies: single-stage landscape scans, multi-instance dominance
comparison, reduced-parameter multistage scans, and the product-formula
error-scaling study against a converged annealing reference.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, ConvergenceError, UsageError
from .model import (
    DiagonalEnergies,
    GroundStateRecord,
    SpinGlassInstance,
    build_diagonal,
    ground_state_indices,
    solve_ground_state,
)
from .propagate import (
    AnnealSchedule,
    apply_anneal,
    apply_driver_rotation,
    apply_mix,
    apply_phase,
    dense_driver,
)
from .protocol import PROTOCOLS, evolve_ensemble, gamma_sequence, time_averaged_metrics
from .states import MAX_DENSE_QUBITS, spectral_norm

DEFAULT_GRID_POINTS = 20
DEFAULT_GAMMA_MAX = 4.0
DEFAULT_T_MAX = 6.0
DEFAULT_ANGLE_MAX = math.pi / 2
DEFAULT_DGAMMA_MAX = 0.5
SCALING_METHODS = ("qaoa1", "qaoa2", "msqw")


@dataclass
class GridScanResult:
    """Energy and success-probability surfaces over a 2D parameter grid."""

    axis1_name: str
    axis1_values: np.ndarray
    axis2_name: str
    axis2_values: np.ndarray
    energy: np.ndarray
    success: np.ndarray
    protocol: str
    stages: int
    instance_id: str
    seed: int
    energy_se: np.ndarray | None = None
    success_se: np.ndarray | None = None

    def best_energy(self) -> tuple[float, float, float]:
        """(min energy, axis1 value, axis2 value) over the grid."""
        i, j = np.unravel_index(np.argmin(self.energy), self.energy.shape)
        return float(self.energy[i, j]), float(self.axis1_values[i]), float(self.axis2_values[j])

    def best_success(self) -> tuple[float, float, float]:
        """(max success probability, axis1 value, axis2 value) over the grid."""
        i, j = np.unravel_index(np.argmax(self.success), self.success.shape)
        return float(self.success[i, j]), float(self.axis1_values[i]), float(self.axis2_values[j])


@dataclass
class DominanceRow:
    instance_id: str
    qw_best_energy: float
    qaoa_best_energy: float
    qw_best_prob: float
    qaoa_best_prob: float


@dataclass
class ScalingReport:
    """Spectral-norm errors of the p-stage approximants against the annealing reference."""

    n: int
    p_values: list[int]
    errors: dict[str, list[float]]       # method -> error per p
    fitted_slopes: dict[str, float]      # log-log slope over the largest half of p_values
    h_max: float
    hdot_max: float
    commutator_norm: float
    schedule_label: str
    t_total: float
    reference_steps: int
    reference_residual: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p_values": self.p_values,
            "errors": self.errors,
            "fitted_slopes": self.fitted_slopes,
            "h_max": self.h_max,
            "hdot_max": self.hdot_max,
            "commutator_norm": self.commutator_norm,
            "schedule": {"label": self.schedule_label, "t_total": self.t_total},
            "reference_steps": self.reference_steps,
            "reference_residual": self.reference_residual,
        }


def _plus_block(n: int, k: int) -> np.ndarray:
    dim = 1 << n
    return np.full((dim, k), 1.0 / np.sqrt(dim), dtype=np.complex128)


def scan_single_stage(
    diag: DiagonalEnergies,
    gs: GroundStateRecord,
    protocol: str,
    points: int = DEFAULT_GRID_POINTS,
    gamma_max: float = DEFAULT_GAMMA_MAX,
    t_max: float = DEFAULT_T_MAX,
    alpha_max: float = DEFAULT_ANGLE_MAX,
    beta_max: float = DEFAULT_ANGLE_MAX,
    seed: int = 0,
) -> GridScanResult:
    """One deterministic run per grid point (no time averaging at p = 1).

    Walk axes are (gamma, t); QAOA axes are (alpha, beta); both linearly
    spaced including the endpoints.
    """
    if protocol not in PROTOCOLS:
        raise UsageError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    minimizers = ground_state_indices(diag, gs)
    energy = np.empty((points, points))
    success = np.empty((points, points))
    if protocol == "msqw":
        axis1_name, axis2_name = "gamma", "t"
        axis1 = np.linspace(0.0, gamma_max, points)
        axis2 = np.linspace(0.0, t_max, points)
        for i, gamma in enumerate(axis1):
            amps = apply_mix(_plus_block(diag.n, points), diag, float(gamma), 1.0, axis2)
            probs = np.abs(amps) ** 2
            energy[i] = diag.energies @ probs
            success[i] = probs[minimizers].sum(axis=0)
    else:
        axis1_name, axis2_name = "alpha", "beta"
        axis1 = np.linspace(0.0, alpha_max, points)
        axis2 = np.linspace(0.0, beta_max, points)
        for i, alpha in enumerate(axis1):
            amps = apply_phase(_plus_block(diag.n, points), diag.energies, axis2)
            amps = apply_driver_rotation(amps, diag.n, float(alpha))
            probs = np.abs(amps) ** 2
            energy[i] = diag.energies @ probs
            success[i] = probs[minimizers].sum(axis=0)
    return GridScanResult(
        axis1_name, axis1, axis2_name, axis2, energy, success,
        protocol=protocol, stages=1, instance_id=diag.instance_id, seed=seed,
    )


def scan_multistage(
    diag: DiagonalEnergies,
    gs: GroundStateRecord,
    protocol: str,
    p: int,
    axis1_values: np.ndarray | None = None,
    axis2_values: np.ndarray | None = None,
    decay_kind: str = "geometric",
    t_min: float = 0.1,
    t_max: float = 0.5,
    samples: int = 2000,
    seed: int = 0,
    threads: int = 1,
) -> GridScanResult:
    """Time-averaged metrics over a reduced 2D parameter grid.

    For p = 2 the axes are the stage rates (gamma1, gamma2); for p >= 3 they
    are (gamma0, delta_gamma) of the decay heuristic. Every grid point draws
    its own runtime tuples from a seed derived from (seed, i, j), so results
    do not depend on evaluation order or thread count.
    """
    if p < 2:
        raise UsageError(f"multistage scan needs p >= 2, got {p}")
    if protocol not in PROTOCOLS:
        raise UsageError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    if axis1_values is None:
        axis1_values = np.linspace(0.0, DEFAULT_GAMMA_MAX, DEFAULT_GRID_POINTS)
    if axis2_values is None:
        axis2_values = (
            np.linspace(0.0, DEFAULT_GAMMA_MAX, DEFAULT_GRID_POINTS)
            if p == 2
            else np.linspace(0.0, DEFAULT_DGAMMA_MAX, DEFAULT_GRID_POINTS)
        )
    axis1_name, axis2_name = ("gamma1", "gamma2") if p == 2 else ("gamma0", "delta_gamma")
    n1, n2 = len(axis1_values), len(axis2_values)
    energy = np.empty((n1, n2))
    success = np.empty((n1, n2))
    energy_se = np.empty((n1, n2))
    success_se = np.empty((n1, n2))

    def fill_row(i: int) -> None:
        for j in range(n2):
            if p == 2:
                gammas = np.array([axis1_values[i], axis2_values[j]])
            else:
                gammas, _ = gamma_sequence(float(axis1_values[i]), float(axis2_values[j]), p, decay_kind)
            point_seed = np.random.SeedSequence([seed, i, j])
            m = time_averaged_metrics(diag, gs, protocol, gammas, t_min, t_max, samples, point_seed)
            energy[i, j] = m.energy
            success[i, j] = m.success_prob
            energy_se[i, j] = m.energy_se
            success_se[i, j] = m.success_se

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill_row, range(n1)))
    else:
        for i in range(n1):
            fill_row(i)
    return GridScanResult(
        axis1_name, np.asarray(axis1_values, dtype=float),
        axis2_name, np.asarray(axis2_values, dtype=float),
        energy, success, protocol=protocol, stages=p,
        instance_id=diag.instance_id, seed=seed,
        energy_se=energy_se, success_se=success_se,
    )


def dominance_study(
    instances: Sequence[SpinGlassInstance],
    points: int = DEFAULT_GRID_POINTS,
    gamma_max: float = DEFAULT_GAMMA_MAX,
    t_max: float = DEFAULT_T_MAX,
    alpha_max: float = DEFAULT_ANGLE_MAX,
    beta_max: float = DEFAULT_ANGLE_MAX,
    threads: int = 1,
) -> tuple[list[DominanceRow], dict]:
    """Grid-optimal single-stage walk vs QAOA metrics, one row per instance."""
    if len(instances) < 2:
        raise UsageError(f"dominance study needs at least 2 instances, got {len(instances)}")
    rows: list[DominanceRow | None] = [None] * len(instances)

    def run_one(k: int) -> None:
        instance = instances[k]
        diag = build_diagonal(instance)
        gs = solve_ground_state(diag)
        kwargs = dict(points=points, gamma_max=gamma_max, t_max=t_max,
                      alpha_max=alpha_max, beta_max=beta_max)
        qw = scan_single_stage(diag, gs, "msqw", **kwargs)
        qa = scan_single_stage(diag, gs, "qaoa", **kwargs)
        rows[k] = DominanceRow(
            instance_id=instance.id,
            qw_best_energy=qw.best_energy()[0],
            qaoa_best_energy=qa.best_energy()[0],
            qw_best_prob=qw.best_success()[0],
            qaoa_best_prob=qa.best_success()[0],
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_one, range(len(instances))))
    else:
        for k in range(len(instances)):
            run_one(k)
    done = [r for r in rows if r is not None]
    wins_energy = sum(r.qw_best_energy < r.qaoa_best_energy for r in done)
    wins_prob = sum(r.qw_best_prob > r.qaoa_best_prob for r in done)
    wins_both = sum(
        r.qw_best_energy < r.qaoa_best_energy and r.qw_best_prob > r.qaoa_best_prob for r in done
    )
    summary = {
        "instances": len(done),
        "qw_wins_energy": wins_energy,
        "qw_wins_prob": wins_prob,
        "qw_wins_both": wins_both,
    }
    return done, summary


# ---------------------------------------------------------------------------
# Error scaling against the annealing reference.

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _segment_means(fn, p: int) -> np.ndarray:
    """Mean of fn over each of the p equal segments of [0, 1] (Gauss-Legendre)."""
    edges = np.linspace(0.0, 1.0, p + 1)
    lo, hi = edges[:-1], edges[1:]
    # nodes mapped into every segment at once: shape (p, 16)
    x = 0.5 * (hi - lo)[:, None] * _GL_NODES[None, :] + 0.5 * (hi + lo)[:, None]
    vals = np.asarray(fn(x), dtype=float)
    if vals.shape != x.shape:  # scalar-only coefficient function
        vals = np.vectorize(fn)(x)
    return vals @ _GL_WEIGHTS / 2.0


def converged_reference(
    diag: DiagonalEnergies,
    schedule: AnnealSchedule,
    tol: float = 1e-8,
    start_steps: int = 64,
    max_steps: int = 1 << 17,
) -> tuple[np.ndarray, int, float]:
    """Dense annealing evolution, midpoint steps doubled until successive
    matrices differ by less than tol in spectral norm.

    Returns (U, steps, last residual).
    """
    dim = 1 << diag.n
    eye = np.eye(dim, dtype=np.complex128)
    steps = start_steps
    u_prev = apply_anneal(eye, diag, schedule, steps)
    while steps <= max_steps:
        u_next = apply_anneal(eye, diag, schedule, 2 * steps)
        residual = spectral_norm(u_next - u_prev)
        if residual < tol:
            return u_next, 2 * steps, residual
        u_prev = u_next
        steps *= 2
    raise ConvergenceError(
        f"annealing reference did not converge below {tol} by {max_steps} steps "
        f"(last residual {residual:.3e} at {steps} steps, t_total={schedule.t_total})"
    )


def _segment_product(
    diag: DiagonalEnergies, method: str, alphas: np.ndarray, betas: np.ndarray, dt: float
) -> np.ndarray:
    """Product of the p per-segment approximants, later segments acting on the left."""
    dim = 1 << diag.n
    u = np.eye(dim, dtype=np.complex128)
    for a, b in zip(alphas, betas):
        if method == "qaoa1":
            u = apply_phase(u, diag.energies, b * dt)
            u = apply_driver_rotation(u, diag.n, a * dt)
        elif method == "qaoa2":
            u = apply_driver_rotation(u, diag.n, a * dt / 2.0)
            u = apply_phase(u, diag.energies, b * dt)
            u = apply_driver_rotation(u, diag.n, a * dt / 2.0)
        elif method == "msqw":
            u = apply_mix(u, diag, float(a), float(b), dt, cache=False)
        else:
            raise UsageError(f"method must be one of {SCALING_METHODS}, got {method!r}")
    return u


def fit_loglog_slope(p_values: Sequence[int], errors: Sequence[float], floor: float = 1e-10) -> float:
    """OLS slope of log2(err) vs log2(p) over the largest half of p_values.

    Points with err below the reference-accuracy floor are discarded; returns
    nan when fewer than two usable points remain.
    """
    order = np.argsort(p_values)
    half = order[len(order) // 2 :]
    ps = np.asarray(p_values, dtype=float)[half]
    es = np.asarray(errors, dtype=float)[half]
    keep = es >= floor
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log2(ps[keep]), np.log2(es[keep]), 1)[0])


def scaling_study(
    diag: DiagonalEnergies,
    schedule: AnnealSchedule,
    p_values: Sequence[int],
    methods: Sequence[str] = SCALING_METHODS,
    reference_tol: float = 1e-8,
) -> ScalingReport:
    """Spectral-norm error of each p-stage approximant versus the reference.

    Per segment j the approximants share the interval-averaged coefficients
    alpha_j = mean(a) and beta_j = mean(b); segments all have length
    t_total / p. Also reports the schedule norm constants and the
    driver/problem commutator norm as diagnostics.
    """
    if diag.n > MAX_DENSE_QUBITS:
        raise ConfigurationError(f"n={diag.n} above the dense-unitary cap {MAX_DENSE_QUBITS}")
    for m in methods:
        if m not in SCALING_METHODS:
            raise UsageError(f"unknown method {m!r}; choose from {SCALING_METHODS}")
    u_ref, ref_steps, ref_residual = converged_reference(diag, schedule, tol=reference_tol)
    errors: dict[str, list[float]] = {m: [] for m in methods}
    for p in p_values:
        dt = schedule.t_total / p
        alphas = _segment_means(schedule.a_fn, p)
        betas = _segment_means(schedule.b_fn, p)
        for m in methods:
            u = _segment_product(diag, m, alphas, betas, dt)
            errors[m].append(spectral_norm(u_ref - u))
    slopes = {m: fit_loglog_slope(p_values, errors[m]) for m in methods}
    h_max, hdot_max = schedule_norm_constants(diag, schedule)
    hd = dense_driver(diag.n)
    hp = np.diag(diag.energies)
    comm = spectral_norm(hd @ hp - hp @ hd)
    return ScalingReport(
        n=diag.n,
        p_values=[int(p) for p in p_values],
        errors={m: [float(e) for e in errors[m]] for m in methods},
        fitted_slopes=slopes,
        h_max=h_max,
        hdot_max=hdot_max,
        commutator_norm=comm,
        schedule_label=schedule.label,
        t_total=schedule.t_total,
        reference_steps=ref_steps,
        reference_residual=ref_residual,
    )


def schedule_norm_constants(
    diag: DiagonalEnergies, schedule: AnnealSchedule, grid_points: int = 1001
) -> tuple[float, float]:
    """max_t ||H(t)|| and max_t ||dH/dt|| on a uniform time grid.

    The derivative uses central finite differences of the coefficient
    functions (H is linear in them); both are diagnostics, not bounds.
    """
    s = np.linspace(0.0, 1.0, grid_points)
    a = np.asarray(schedule.a_fn(s), dtype=float)
    b = np.asarray(schedule.b_fn(s), dtype=float)
    hd = dense_driver(diag.n)
    hp_diag = diag.energies
    idx = np.arange(1 << diag.n)

    def herm_norm(ca: float, cb: float) -> float:
        h = ca * hd
        h[idx, idx] += cb * hp_diag
        return float(np.max(np.abs(np.linalg.eigvalsh(h))))

    h_max = max(herm_norm(ca, cb) for ca, cb in zip(a, b))
    # da/dt via the s grid: dt = t_total / (grid_points - 1)
    dt = schedule.t_total / (grid_points - 1)
    da = np.gradient(a, dt)
    db = np.gradient(b, dt)
    hdot_max = max(herm_norm(ca, cb) for ca, cb in zip(da, db))
    return h_max, hdot_max


def emit_schedule_profile(gamma0: float, delta_gamma: float, p: int, decay_kind: str = "geometric") -> list[tuple[int, float, float]]:
    """Normalized coefficient profile (stage, alpha_j/t_j, beta_j/t_j).

    The ratios depend only on the stage rates: alpha/t = gamma/(1+gamma) and
    beta/t = 1/(1+gamma), so the runtime drops out.
    """
    gammas, _ = gamma_sequence(gamma0, delta_gamma, p, decay_kind)
    return [
        (j + 1, float(g / (1.0 + g)), float(1.0 / (1.0 + g)))
        for j, g in enumerate(gammas)
    ]


# ---------------------------------------------------------------------------
# Delimited outputs. Axis and metric values are written with float repr
# (shortest round-trip), so reruns are byte-identical.

def _fmt(x: float) -> str:
    return repr(float(x))


def write_grid_csv(result: GridScanResult, path: str | Path) -> None:
    """Rows in row-major order over (axis1, axis2)."""
    lines = ["axis1,axis2,energy,success_prob"]
    for i, v1 in enumerate(result.axis1_values):
        for j, v2 in enumerate(result.axis2_values):
            lines.append(
                f"{_fmt(v1)},{_fmt(v2)},{_fmt(result.energy[i, j])},{_fmt(result.success[i, j])}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


def write_dominance_csv(rows: Sequence[DominanceRow], path: str | Path) -> None:
    lines = ["instance_id,qw_best_energy,qaoa_best_energy,qw_best_prob,qaoa_best_prob"]
    for r in rows:
        lines.append(
            f"{r.instance_id},{_fmt(r.qw_best_energy)},{_fmt(r.qaoa_best_energy)},"
            f"{_fmt(r.qw_best_prob)},{_fmt(r.qaoa_best_prob)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_scaling_csv(report: ScalingReport, path: str | Path) -> None:
    lines = ["p,err_qaoa1,err_qaoa2,err_msqw"]
    for k, p in enumerate(report.p_values):
        cells = [str(p)]
        for m in ("qaoa1", "qaoa2", "msqw"):
            cells.append(_fmt(report.errors[m][k]) if m in report.errors else "")
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def write_profile_csv(rows: Sequence[tuple[int, float, float]], path: str | Path) -> None:
    lines = ["stage,alpha_over_t,beta_over_t"]
    for stage, aot, bot in rows:
        lines.append(f"{stage},{_fmt(aot)},{_fmt(bot)}")
    Path(path).write_text("\n".join(lines) + "\n")
