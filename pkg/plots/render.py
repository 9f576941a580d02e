#!/usr/bin/env python3
"""Render rbsweep CSV artifacts to figures.

Reads only the delimited files the CLI writes (traces, estimator curves,
sweeps, compare tables) and never imports the solver package, so it can sit
next to archived results.

    render.py --kind convergence    --in trace_algorithm2.csv --out conv.png
    render.py --kind effectivity    --in compare.csv          --out eff.png
    render.py --kind estimator_curve --in curve_algorithm2.csv --out est.png
    render.py --kind sweep          --in sweep.csv            --out sweep.png
"""

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams["figure.figsize"] = (6.4, 4.0)
plt.rcParams["axes.grid"] = True
plt.rcParams["grid.alpha"] = 0.3
plt.rcParams["lines.linewidth"] = 1.2


class SchemaMismatch(Exception):
    """The CSV lacks a column (or the values in it) that a plot kind needs."""


def read_columns(path):
    """Header comments and string-valued columns from one CSV artifact."""
    comments, rows = [], []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line[1:].strip())
            elif line.strip():
                rows.append(line)
    reader = csv.reader(rows)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaMismatch(f"{path}: no header row") from None
    columns = {name: [] for name in header}
    for row in reader:
        for name, value in zip(header, row):
            columns[name].append(value)
    return comments, columns


def column(columns, name, path):
    if name not in columns:
        raise SchemaMismatch(f"{path}: missing column '{name}'")
    return columns[name]


def numeric(columns, name, path):
    """Column as floats; blank cells become nan, anything else must parse."""
    out = []
    for value in column(columns, name, path):
        if value == "":
            out.append(np.nan)
            continue
        try:
            out.append(float(value))
        except ValueError:
            raise SchemaMismatch(
                f"{path}: non-numeric value {value!r} in column '{name}'"
            ) from None
    return np.asarray(out)


def series_groups(columns, comments, path):
    """(label, row indices) per strategy; single anonymous group otherwise."""
    if "strategy" in columns:
        labels = []
        for name in columns["strategy"]:
            if name not in labels:
                labels.append(name)
        idx = {name: [] for name in labels}
        for i, name in enumerate(columns["strategy"]):
            idx[name].append(i)
        return [(name, np.asarray(idx[name])) for name in labels]
    label = next(
        (c.split("=", 1)[1] for c in comments if c.startswith("strategy=")), "trace"
    )
    n = len(next(iter(columns.values()), []))
    return [(label, np.arange(n))]


def plot_convergence(path):
    comments, cols = read_columns(path)
    iters = numeric(cols, "iter", path)
    xi = numeric(cols, "xi", path)
    eps_true = numeric(cols, "eps_true", path) if "eps_true" in cols else None
    groups = series_groups(cols, comments, path)
    fig, ax = plt.subplots()
    for label, idx in groups:
        line = ax.semilogy(iters[idx], xi[idx], marker="o", ms=3.5, label=label)
        # multi-strategy files stay one labeled series per strategy
        if len(groups) == 1 and eps_true is not None and np.isfinite(eps_true[idx]).any():
            ax.semilogy(
                iters[idx], eps_true[idx], ls="--", color=line[0].get_color(),
                label=f"{label} (true)",
            )
    ax.set_xlabel("iteration")
    ax.set_ylabel("error indicator")
    ax.legend()
    fig.tight_layout()
    return fig


def plot_effectivity(path):
    comments, cols = read_columns(path)
    iters = numeric(cols, "iter", path)
    xi = numeric(cols, "xi", path)
    eps_true = numeric(cols, "eps_true", path)
    with np.errstate(divide="ignore", invalid="ignore"):
        eff = np.where(eps_true > 0, xi / eps_true, np.nan)
    if not np.isfinite(eff).any():
        raise SchemaMismatch(f"{path}: column 'eps_true' holds no usable values")
    fig, ax = plt.subplots()
    for label, idx in series_groups(cols, comments, path):
        ax.semilogy(iters[idx], eff[idx], marker="o", ms=3.5, label=label)
    ax.axhline(1.0, color="k", lw=0.8, ls=":")
    ax.set_xlabel("iteration")
    ax.set_ylabel("effectivity")
    ax.legend()
    fig.tight_layout()
    return fig


def plot_estimator_curve(path):
    _, cols = read_columns(path)
    omega = numeric(cols, "omega", path)
    dual = numeric(cols, "residual_dual_norm", path)
    estimate = numeric(cols, "state_estimate", path)
    if not np.isfinite(estimate).any():
        raise SchemaMismatch(f"{path}: column 'state_estimate' holds no usable values")
    fig, ax = plt.subplots()
    ax.semilogy(omega, dual, label="residual dual norm")
    ax.semilogy(omega, estimate, label="state estimate")
    if "bound" in cols:
        bound = numeric(cols, "bound", path)
        shown = np.where(np.isfinite(bound), bound, np.nan)
        if np.isfinite(shown).any():
            ax.semilogy(omega, shown, ls=":", color="gray", label="certified bound")
    ax.set_xlabel("frequency")
    ax.set_ylabel("error measure")
    ax.legend()
    fig.tight_layout()
    return fig


def plot_sweep(path):
    comments, cols = read_columns(path)
    omega = numeric(cols, "omega", path)
    magnitude = np.hypot(numeric(cols, "re_y", path), numeric(cols, "im_y", path))
    fig, ax = plt.subplots()
    ax.semilogy(omega, magnitude, label="|y|")
    speedup = next((c for c in comments if c.startswith("speedup")), None)
    if speedup:
        ax.set_title(speedup)
    ax.set_xlabel("frequency")
    ax.set_ylabel("port response magnitude")
    ax.legend()
    fig.tight_layout()
    return fig


RENDERERS = {
    "convergence": plot_convergence,
    "effectivity": plot_effectivity,
    "estimator_curve": plot_estimator_curve,
    "sweep": plot_sweep,
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kind", choices=sorted(RENDERERS), required=True)
    parser.add_argument("--in", dest="src", required=True, metavar="CSV")
    parser.add_argument("--out", required=True, metavar="IMAGE")
    args = parser.parse_args(argv)
    try:
        fig = RENDERERS[args.kind](args.src)
    except (SchemaMismatch, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    fig.savefig(args.out, dpi=150)
    plt.close(fig)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
