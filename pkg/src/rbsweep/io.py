"""Delimited output and basis serialization.

All numeric fields print through one `%.17g` formatter so repeated runs with
the same seed produce byte-identical files.  Comment lines start with `#` and
carry run metadata; every downstream reader skips them.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import ParseError
from .fom import FullOrderModel
from .greedy import GreedyTrace
from .reduction import ReducedSpace, from_vectors

TRACE_COLUMNS = ("iter", "omega", "xi", "eps_true", "eps_state", "eps_res", "m_primal", "m_residual")
CURVE_COLUMNS = ("omega", "residual_dual_norm", "state_estimate", "infsup", "bound")
SWEEP_COLUMNS = ("omega", "re_y", "im_y", "residual_dual_norm", "state_estimate")
SPECTRAL_COLUMNS = ("omega_n", "re_An", "im_An")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def _write_rows(path: Path, header, rows, comments=()) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_table(path, header, rows, comments=()) -> None:
    """General delimited table with the shared formatting rules."""
    _write_rows(Path(path), header, rows, comments)


def write_trace(path, trace: GreedyTrace) -> None:
    """Convergence trace: one row per sampled frequency."""
    comments = [f"strategy={trace.strategy}", f"converged={trace.converged}"]
    if trace.final_eps_true is not None:
        comments.append(f"final_eps_true={_fmt(trace.final_eps_true)}")
    comments.extend(f"event: {e}" for e in trace.events)
    rows = [
        (r.iteration, r.omega, r.xi, r.eps_true, r.eps_state, r.eps_res, r.m_primal, r.m_residual)
        for r in trace.rows
    ]
    _write_rows(Path(path), TRACE_COLUMNS, rows, comments)


def write_curve(path, grid, dual_norms, estimates, infsups, bounds, comments=()) -> None:
    """Estimator curves over the candidate grid, one row per frequency."""
    rows = zip(grid, dual_norms, estimates, infsups, bounds)
    _write_rows(Path(path), CURVE_COLUMNS, rows, comments)


def write_sweep(path, grid, outputs, dual_norms, estimates, elapsed: dict) -> None:
    """Swept transfer output with certification columns and a timing footer."""
    path = Path(path)
    rows = [
        (w, y.real, y.imag, d, s)
        for w, y, d, s in zip(grid, outputs, dual_norms, estimates)
    ]
    _write_rows(path, SWEEP_COLUMNS, rows)
    with path.open("a", newline="") as fh:
        for key, value in elapsed.items():
            fh.write(f"# {key} = {value:.6g}\n")


def write_spectral(path, omegas, amplitudes, comments=()) -> None:
    """In-band resonance table: frequency and complex coupling per mode."""
    rows = [(w, a.real, a.imag) for w, a in zip(omegas, amplitudes)]
    _write_rows(Path(path), SPECTRAL_COLUMNS, rows, comments)


def write_compare(path, traces: dict[str, GreedyTrace], comments=()) -> None:
    """Long-format join of several traces, keyed by a strategy column.

    Summary lines (final sizes, convergence flags, per-iteration effectivity
    where both the stopping value and the true indicator are present) ride
    along as comments so the file stays a single self-describing artifact.
    """
    all_comments = list(comments)
    for name in sorted(traces):
        t = traces[name]
        final_xi = t.rows[-1].xi if t.rows else None
        all_comments.append(
            f"summary strategy={name} converged={t.converged} "
            f"m_primal={t.primal.size if t.primal else 0} "
            f"m_residual={t.residual_space.size if t.residual_space else ''} "
            f"final_xi={_fmt(final_xi)} final_eps_true={_fmt(t.final_eps_true)}"
        )
    for name in sorted(traces):
        t = traces[name]
        for r in t.rows:
            if r.xi is not None and r.eps_true not in (None, 0.0):
                all_comments.append(
                    f"effectivity strategy={name} iter={r.iteration} "
                    f"value={_fmt(r.xi / r.eps_true)}"
                )
    rows = []
    for name in sorted(traces):
        for r in traces[name].rows:
            rows.append(
                (name, r.iteration, r.omega, r.xi, r.eps_true, r.eps_state, r.eps_res, r.m_primal, r.m_residual)
            )
    _write_rows(Path(path), ("strategy",) + TRACE_COLUMNS, rows, all_comments)


def export_basis(path, space: ReducedSpace) -> None:
    """Write a basis as rows of re/im pairs, one full-order row per line.

    Line 1 is a comment with the shape so a reader can validate before
    parsing; column ``2j`` holds Re of basis column ``j``, column ``2j+1``
    its Im part.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    basis = space.basis
    with path.open("w", newline="") as fh:
        fh.write(f"# basis n={basis.shape[0]} m={basis.shape[1]} label={space.label}\n")
        for row in basis:
            parts = []
            for val in row:
                parts.append(_fmt(val.real))
                parts.append(_fmt(val.imag))
            fh.write(" ".join(parts) + "\n")


def import_basis(path, model: FullOrderModel, label: str = "primal") -> ReducedSpace:
    """Rebuild a reduced space from an exported basis file.

    Columns re-enter through the ordinary enrichment path, which restores
    X-orthonormality to machine precision and rebuilds the reduced operators
    against this model's matrices.
    """
    path = Path(path)
    header = None
    data_rows = []
    try:
        fh = path.open()
    except OSError as exc:
        raise ParseError(f"cannot read basis {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if header is None and "basis" in line:
                    header = line
                continue
            try:
                data_rows.append([float(tok) for tok in line.split()])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: non-numeric basis entry") from exc
    if not data_rows:
        raise ParseError(f"{path}: no basis rows found")
    widths = {len(r) for r in data_rows}
    if len(widths) != 1:
        raise ParseError(f"{path}: ragged basis rows, widths {sorted(widths)}")
    width = widths.pop()
    if width % 2 != 0:
        raise ParseError(f"{path}: odd column count {width}, expected re/im pairs")
    flat = np.asarray(data_rows)
    basis = flat[:, 0::2] + 1j * flat[:, 1::2]
    if basis.shape[0] != model.n:
        raise ParseError(
            f"{path}: basis has {basis.shape[0]} rows, model has {model.n} unknowns"
        )
    return from_vectors(model, basis.T, label=label)


def read_csv_columns(path) -> dict[str, list[str]]:
    """Read a delimited file written by this module back into columns."""
    path = Path(path)
    with path.open() as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.reader(rows)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{path}: empty file") from None
    columns = {name: [] for name in header}
    for row in reader:
        if not row:
            continue
        for name, value in zip(header, row):
            columns[name].append(value)
    return columns
