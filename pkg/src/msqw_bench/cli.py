"""Command-line entry point: instance generation and solving, landscape
scans, dominance comparison, error-scaling study, and schedule profiles.

Every command writes its primary artifact in a fixed byte format (JSONL or
CSV) plus a sidecar JSON embedding the tool version, the fully resolved
configuration, and the seed, so identical flags reproduce identical bytes.
Exit codes: 0 success, 2 usage error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import UsageError
from .experiment import (
    DEFAULT_ANGLE_MAX,
    DEFAULT_DGAMMA_MAX,
    DEFAULT_GAMMA_MAX,
    DEFAULT_GRID_POINTS,
    DEFAULT_T_MAX,
    dominance_study,
    emit_schedule_profile,
    scaling_study,
    scan_multistage,
    scan_single_stage,
    write_dominance_csv,
    write_grid_csv,
    write_profile_csv,
    write_scaling_csv,
)
from .model import (
    build_diagonal,
    generate_instance,
    read_instances,
    solve_ground_state,
    write_instances,
)
from .propagate import AnnealSchedule
from .protocol import (
    HeuristicScheduleParams,
    build_heuristic_schedule,
    gamma_sequence,
    schedule_to_dict,
)

THREADS_ENV = "MSQW_BENCH_THREADS"


def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _resolved_config(args: argparse.Namespace) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _write_sidecar(path: Path, payload: dict, args: argparse.Namespace) -> None:
    payload = dict(payload)
    payload["tool_version"] = __version__
    payload["config"] = _resolved_config(args)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _load_solved_instance(path: str, index: int):
    rows = read_instances(path)
    if not rows:
        raise UsageError(f"no instances in {path}")
    if not 0 <= index < len(rows):
        raise UsageError(f"instance index {index} out of range (file has {len(rows)})")
    instance, stored_e0 = rows[index]
    if stored_e0 is None:
        raise UsageError(f"instance {instance.id} in {path} has no ground-state record; run solve first")
    diag = build_diagonal(instance)
    gs = solve_ground_state(diag)
    return instance, diag, gs


def cmd_gen(args) -> int:
    instances = [(generate_instance(args.n, args.seed + k), None) for k in range(args.count)]
    write_instances(args.out, instances)
    _write_sidecar(Path(str(args.out) + ".meta.json"), {"instances": args.count}, args)
    return 0


def cmd_solve(args) -> int:
    rows = read_instances(args.infile)
    solved = []
    for instance, _ in rows:
        diag = build_diagonal(instance)
        solved.append((instance, solve_ground_state(diag)))
    out = args.out or args.infile
    write_instances(out, solved)
    _write_sidecar(Path(str(out) + ".meta.json"), {"instances": len(solved)}, args)
    return 0


def cmd_scan(args) -> int:
    _, diag, gs = _load_solved_instance(args.infile, args.index)
    if args.stages == 1:
        result = scan_single_stage(
            diag, gs, args.protocol,
            points=args.grid_points, gamma_max=args.gamma_max, t_max=args.t_max,
            alpha_max=args.alpha_max, beta_max=args.beta_max, seed=args.seed,
        )
    else:
        axis1 = np.linspace(0.0, args.gamma_max, args.grid_points)
        axis2 = (
            np.linspace(0.0, args.gamma_max, args.grid_points)
            if args.stages == 2
            else np.linspace(0.0, args.dgamma_max, args.grid_points)
        )
        result = scan_multistage(
            diag, gs, args.protocol, args.stages, axis1, axis2,
            decay_kind=args.decay, t_min=args.tmin, t_max=args.tmax,
            samples=args.samples, seed=args.seed, threads=args.threads,
        )
    write_grid_csv(result, args.out)
    best_e, e1, e2 = result.best_energy()
    best_p, p1, p2 = result.best_success()
    summary = {
        "instance_id": result.instance_id,
        "protocol": result.protocol,
        "stages": result.stages,
        "axes": {result.axis1_name: list(map(float, result.axis1_values)),
                 result.axis2_name: list(map(float, result.axis2_values))},
        "ground_energy": gs.e0,
        "min_energy": {"value": best_e, result.axis1_name: e1, result.axis2_name: e2},
        "max_success_prob": {"value": best_p, result.axis1_name: p1, result.axis2_name: p2},
        "seed": args.seed,
    }
    _write_sidecar(Path(args.out).with_suffix(".summary.json"), summary, args)
    return 0


def cmd_compare(args) -> int:
    rows = read_instances(args.infile)
    for instance, e0 in rows:
        if e0 is None:
            raise UsageError(f"instance {instance.id} has no ground-state record; run solve first")
    instances = [instance for instance, _ in rows]
    table, summary = dominance_study(
        instances, points=args.grid_points, gamma_max=args.gamma_max, t_max=args.t_max,
        alpha_max=args.alpha_max, beta_max=args.beta_max, threads=args.threads,
    )
    write_dominance_csv(table, args.out)
    _write_sidecar(Path(args.out).with_suffix(".summary.json"), summary, args)
    return 0


def cmd_scaling(args) -> int:
    instance, diag, _ = _load_solved_instance(args.infile, args.index)
    p_values = [int(tok) for tok in args.pvals.split(",") if tok]
    if not p_values or any(p < 1 for p in p_values):
        raise UsageError(f"--pvals must be positive integers, got {args.pvals!r}")
    schedule = AnnealSchedule.linear_ramp(args.t_total)
    report = scaling_study(diag, schedule, p_values)
    write_scaling_csv(report, args.out)
    payload = report.to_dict()
    payload["instance"] = {"id": instance.id, "n": instance.n, "seed": instance.seed}
    _write_sidecar(Path(args.out).with_suffix(".report.json"), payload, args)
    return 0


def cmd_profile(args) -> int:
    rows = emit_schedule_profile(args.gamma0, args.dgamma, args.stages, args.decay)
    write_profile_csv(rows, args.out)
    params = HeuristicScheduleParams(
        gamma0=args.gamma0, delta_gamma=args.dgamma, p=args.stages, decay_kind=args.decay,
        t_min=args.tmin, t_max=args.tmax, samples=args.samples,
    )
    midpoint = 0.5 * (args.tmin + args.tmax)
    msqw, qaoa = build_heuristic_schedule(params, [midpoint] * args.stages)
    gammas, clamped = gamma_sequence(args.gamma0, args.dgamma, args.stages, args.decay)
    meta = {
        "stages": args.stages,
        "gammas": [float(g) for g in gammas],
        "clamped": clamped,
        "schedules": {"msqw": schedule_to_dict(msqw), "qaoa": schedule_to_dict(qaoa)},
    }
    _write_sidecar(Path(args.out).with_suffix(".meta.json"), meta, args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msqw-bench",
        description="Benchmark multi-stage quantum walks and QAOA on spin-glass instances.",
    )
    parser.add_argument("--version", action="version", version=f"msqw-bench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_grid_flags(p):
        p.add_argument("--grid-points", type=int, default=DEFAULT_GRID_POINTS)
        p.add_argument("--gamma-max", type=float, default=DEFAULT_GAMMA_MAX)
        p.add_argument("--t-max", dest="t_max", type=float, default=DEFAULT_T_MAX)
        p.add_argument("--alpha-max", type=float, default=DEFAULT_ANGLE_MAX)
        p.add_argument("--beta-max", type=float, default=DEFAULT_ANGLE_MAX)

    def add_threads(p):
        p.add_argument("--threads", type=int, default=_default_threads(),
                       help=f"worker threads (default: cores, or ${THREADS_ENV})")

    p = sub.add_parser("gen", help="generate spin-glass instances to a JSONL file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="instance k uses seed + k")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="fill ground-state records of an instance file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None, help="default: rewrite the input file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("scan", help="parameter-grid scan of one instance")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--protocol", choices=["msqw", "qaoa"], required=True)
    p.add_argument("--stages", type=int, default=1)
    add_grid_flags(p)
    p.add_argument("--dgamma-max", type=float, default=DEFAULT_DGAMMA_MAX,
                   help="delta-gamma axis upper bound for scans with stages >= 3")
    p.add_argument("--decay", choices=["geometric", "linear"], default="geometric")
    p.add_argument("--tmin", type=float, default=0.1)
    p.add_argument("--tmax", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    add_threads(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("compare", help="single-stage dominance table over an instance file")
    p.add_argument("--in", dest="infile", required=True)
    add_grid_flags(p)
    add_threads(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("scaling", help="error scaling of stage-discretized evolutions")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--pvals", default="4,8,16,32,64,128")
    p.add_argument("--t-total", dest="t_total", type=float, default=2.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("profile", help="normalized schedule profile of the decay heuristic")
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--gamma0", type=float, required=True)
    p.add_argument("--dgamma", type=float, required=True)
    p.add_argument("--decay", choices=["geometric", "linear"], default="geometric")
    p.add_argument("--tmin", type=float, default=0.1)
    p.add_argument("--tmax", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_profile)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"msqw-bench: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"msqw-bench: i/o failure: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure, e.g. non-converging reference
        print(f"msqw-bench: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
