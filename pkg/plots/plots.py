#!/usr/bin/env python3
"""Render figures from the msqw-bench CLI's CSV/JSON outputs.

Kinds: heatmap (grid CSV, optionally a paired second grid with a shared
color scale per metric), scatter (dominance CSV with a y=x guide), profile
(stage coefficient ratios), scaling (log-log error curves with fitted-slope
annotations from the sidecar report JSON). Emits PNG; never modifies inputs.

Usage:
  python3 plots.py --kind heatmap --in grid_qw.csv --pair grid_qaoa.csv \
      --shared-scale --out qw.png
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


class PlotDataError(Exception):
    """Input file missing, empty, or malformed."""


GRID_HEADER = ["axis1", "axis2", "energy", "success_prob"]
DOMINANCE_HEADER = ["instance_id", "qw_best_energy", "qaoa_best_energy", "qw_best_prob", "qaoa_best_prob"]
SCALING_HEADER = ["p", "err_qaoa1", "err_qaoa2", "err_msqw"]
PROFILE_HEADER = ["stage", "alpha_over_t", "beta_over_t"]


def _read_rows(path, expected_header):
    path = Path(path)
    if not path.exists():
        raise PlotDataError(f"{path}: no such file")
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise PlotDataError(f"{path}: no data (empty file)")
        if header != expected_header:
            raise PlotDataError(f"{path}: line 1: expected header {','.join(expected_header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected_header):
                raise PlotDataError(f"{path}: line {lineno}: expected {len(expected_header)} fields, got {len(row)}")
            rows.append((lineno, row))
    if not rows:
        raise PlotDataError(f"{path}: no data (header only)")
    return rows


def _floats(path, rows, columns):
    out = []
    for lineno, row in rows:
        try:
            out.append([float(row[c]) for c in columns])
        except ValueError as exc:
            raise PlotDataError(f"{path}: line {lineno}: {exc}") from None
    return np.asarray(out)


def read_grid(path):
    """Grid CSV back into (axis1 values, axis2 values, energy, success) arrays."""
    rows = _read_rows(path, GRID_HEADER)
    data = _floats(path, rows, [0, 1, 2, 3])
    axis1 = list(dict.fromkeys(data[:, 0]))
    axis2 = list(dict.fromkeys(data[:, 1]))
    n1, n2 = len(axis1), len(axis2)
    if n1 * n2 != data.shape[0]:
        raise PlotDataError(f"{path}: {data.shape[0]} rows do not tile a {n1} x {n2} grid")
    energy = data[:, 2].reshape(n1, n2)
    success = data[:, 3].reshape(n1, n2)
    return np.array(axis1), np.array(axis2), energy, success


def plot_heatmap(in_path, out_path, pair_path=None, shared_scale=False):
    """One image per grid CSV with energy and success-probability panels.

    With a pair and --shared-scale, each metric uses one color range across
    both images. Returns per-image color limits for inspection.
    """
    grids = [(Path(in_path), read_grid(in_path))]
    if pair_path is not None:
        grids.append((Path(pair_path), read_grid(pair_path)))
    if shared_scale:
        e_lim = (min(g[2].min() for _, g in grids), max(g[2].max() for _, g in grids))
        p_lim = (min(g[3].min() for _, g in grids), max(g[3].max() for _, g in grids))
    out_paths = [Path(out_path)]
    if pair_path is not None:
        out = Path(out_path)
        out_paths.append(out.with_name(out.stem + "-pair" + (out.suffix or ".png")))
    meta = {"images": []}
    for (src, (axis1, axis2, energy, success)), dest in zip(grids, out_paths):
        if not shared_scale:
            e_lim = (energy.min(), energy.max())
            p_lim = (success.min(), success.max())
        fig, axes = plt.subplots(1, 2, figsize=(9.6, 3.9), constrained_layout=True)
        extent = [axis2[0], axis2[-1], axis1[0], axis1[-1]]
        for ax, grid, lim, cmap, title in (
            (axes[0], energy, e_lim, "viridis", "energy"),
            (axes[1], success, p_lim, "inferno", "success probability"),
        ):
            im = ax.imshow(grid, origin="lower", aspect="auto", extent=extent,
                           vmin=lim[0], vmax=lim[1], cmap=cmap)
            ax.set_xlabel(GRID_HEADER[1])
            ax.set_ylabel(GRID_HEADER[0])
            ax.set_title(f"{title} ({src.stem})")
            fig.colorbar(im, ax=ax)
        fig.savefig(dest, dpi=150)
        meta["images"].append({
            "path": str(dest),
            "energy_clim": tuple(float(v) for v in e_lim),
            "success_clim": tuple(float(v) for v in p_lim),
            "figure": fig,
        })
    return meta


def plot_scatter(in_path, out_path):
    """Walk vs QAOA grid-optimal metrics per instance, with the y=x guide."""
    rows = _read_rows(in_path, DOMINANCE_HEADER)
    data = _floats(in_path, rows, [1, 2, 3, 4])
    qw_e, qa_e, qw_p, qa_p = data.T
    fig, axes = plt.subplots(1, 2, figsize=(9.6, 4.2), constrained_layout=True)
    for ax, qa, qw, label in (
        (axes[0], qa_e, qw_e, "best energy"),
        (axes[1], qa_p, qw_p, "best success probability"),
    ):
        ax.scatter(qa, qw, s=18, alpha=0.8)
        lo = min(qa.min(), qw.min())
        hi = max(qa.max(), qw.max())
        pad = 0.05 * (hi - lo) if hi > lo else 0.1
        span = (lo - pad, hi + pad)
        ax.plot(span, span, "k--", linewidth=0.9, label="equal performance")
        ax.set_xlim(span)
        ax.set_ylim(span)
        ax.set_xlabel(f"QAOA {label}")
        ax.set_ylabel(f"QW {label}")
        ax.legend(loc="best", fontsize=8)
    fig.savefig(out_path, dpi=150)
    return {"points": int(data.shape[0]), "figure": fig}


def plot_profile(in_path, out_path):
    """Stage-resolved alpha/t and beta/t coefficient shares of the schedule."""
    rows = _read_rows(in_path, PROFILE_HEADER)
    data = _floats(in_path, rows, [0, 1, 2])
    stage, aot, bot = data.T
    fig, ax = plt.subplots(figsize=(6.4, 4.2), constrained_layout=True)
    ax.plot(stage, aot, "o-", markersize=3, label="alpha / t (driver share)")
    ax.plot(stage, bot, "s-", markersize=3, label="beta / t (problem share)")
    ax.set_xlabel("stage")
    ax.set_ylabel("coefficient / stage time")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="best")
    fig.savefig(out_path, dpi=150)
    return {"stages": int(stage[-1]), "figure": fig}


def plot_scaling(in_path, out_path):
    """Log-log error curves per method; slopes annotated from the report JSON.

    The report is looked up at <input stem>.report.json; without it the plot
    is still rendered, minus annotations, with a warning on stderr.
    """
    rows = _read_rows(in_path, SCALING_HEADER)
    data = _floats(in_path, rows, [0, 1, 2, 3])
    p = data[:, 0]
    report_path = Path(in_path).with_suffix(".report.json")
    slopes = {}
    if report_path.exists():
        slopes = json.loads(report_path.read_text()).get("fitted_slopes", {})
    else:
        print(f"warning: {report_path} not found; rendering without slope annotations", file=sys.stderr)
    fig, ax = plt.subplots(figsize=(6.4, 4.6), constrained_layout=True)
    markers = {"qaoa1": "o", "qaoa2": "s", "msqw": "^"}
    for col, method in ((1, "qaoa1"), (2, "qaoa2"), (3, "msqw")):
        label = method
        if method in slopes and slopes[method] is not None:
            label = f"{method} (slope {slopes[method]:.2f})"
        ax.loglog(p, data[:, col], markers[method] + "-", markersize=4, label=label)
    ax.set_xlabel("stages p")
    ax.set_ylabel("spectral-norm error vs annealing reference")
    ax.legend(loc="best")
    fig.savefig(out_path, dpi=150)
    return {"rows": int(data.shape[0]), "annotated": bool(slopes), "figure": fig}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kind", choices=["heatmap", "scatter", "profile", "scaling"], required=True)
    parser.add_argument("--in", dest="infile", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--pair", default=None, help="second grid CSV (heatmap only)")
    parser.add_argument("--shared-scale", action="store_true",
                        help="one color range per metric across the pair")
    args = parser.parse_args(argv)
    try:
        if args.kind == "heatmap":
            meta = plot_heatmap(args.infile, args.out, pair_path=args.pair,
                                shared_scale=args.shared_scale)
            for image in meta["images"]:
                plt.close(image.pop("figure"))
        else:
            if args.pair or args.shared_scale:
                print("warning: --pair/--shared-scale only apply to heatmaps", file=sys.stderr)
            render = {"scatter": plot_scatter, "profile": plot_profile, "scaling": plot_scaling}[args.kind]
            meta = render(args.infile, args.out)
            plt.close(meta.pop("figure"))
    except PlotDataError as exc:
        print(f"plots: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
