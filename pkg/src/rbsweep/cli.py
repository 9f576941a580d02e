"""Command line front end.

Four verbs: ``greedy`` builds a space and writes its trace, ``sweep`` runs
the certified fast sweep, ``compare`` races the sampling strategies on one
model, ``oracle`` writes the modal reference outputs.  Exit codes: 0 on
success, 1 for configuration problems, 2 for solver failures, 3 when a greedy
run exhausts its iteration budget without converging.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .config import build_greedy_config, build_model, default_config, parse_config, strategy_list
from .errors import (
    DimensionMismatch,
    InvalidPort,
    MassNotPositiveDefinite,
    NotSymmetric,
    ParseError,
    RBSweepError,
)
from .estimators import certification_curves, residual, state_estimate_curve
from .fom import nudge_frequency, solve_fom
from .greedy import STRATEGIES, run_greedy
from .io import (
    export_basis,
    import_basis,
    write_compare,
    write_curve,
    write_spectral,
    write_sweep,
    write_table,
    write_trace,
)
from .reduction import compose_residual_space, solve_rom
from .spectral import compute_statics, coupling_coefficients, modal_decomposition, modal_solve

# input problems exit 1, numerical failures exit 2
CONFIG_ERRORS = (ParseError, InvalidPort, DimensionMismatch, NotSymmetric, MassNotPositiveDefinite, ValueError)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_UNCONVERGED = 3


def _load_config(args):
    return parse_config(args.config) if args.config else default_config()


def _summary(trace) -> str:
    m_res = trace.residual_space.size if trace.residual_space is not None else "-"
    return (
        f"strategy={trace.strategy} converged={trace.converged} "
        f"iters={len(trace.rows)} m_primal={trace.primal.size} m_residual={m_res}"
    )


def _run_one(model, cfg, strategy, out, seed, oracle) -> int:
    gconf = build_greedy_config(cfg, model, strategy, seed=seed, oracle=oracle)
    trace = run_greedy(model, gconf)
    write_trace(out / f"trace_{strategy}.csv", trace)
    duals, estimates, betas, bounds = certification_curves(
        model, trace.primal, trace.residual_space, gconf.grid
    )
    estimates_col = estimates if estimates is not None else [None] * len(gconf.grid)
    write_curve(
        out / f"curve_{strategy}.csv",
        gconf.grid,
        duals,
        estimates_col,
        betas,
        bounds,
        comments=[f"strategy={trace.strategy}"],
    )
    export_basis(out / f"basis_{strategy}.txt", trace.primal)
    print(_summary(trace))
    for name in (f"trace_{strategy}.csv", f"curve_{strategy}.csv", f"basis_{strategy}.txt"):
        print(f"wrote {out / name}")
    return EXIT_OK if trace.converged else EXIT_UNCONVERGED


def _cmd_greedy(args) -> int:
    cfg = _load_config(args)
    model = build_model(cfg)
    out = Path(args.out)
    rc = EXIT_OK
    for strategy in strategy_list(cfg, args.strategy):
        one = _run_one(model, cfg, strategy, out, args.seed, args.oracle or None)
        rc = max(rc, one)
    return rc


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    model = build_model(cfg)
    out = Path(args.out)
    grid = model.band.grid()
    step = model.band.step

    t0 = time.perf_counter()
    primal = import_basis(args.basis, model)
    residual_space = compose_residual_space(primal, [compute_statics(model)])
    offline_seconds = time.perf_counter() - t0

    t0 = time.perf_counter()
    outputs = np.zeros(grid.size, dtype=complex)
    duals = np.zeros(grid.size)
    for i, w in enumerate(grid):
        omega = nudge_frequency(model, float(w), step)
        sol = solve_rom(primal, model, omega)
        x = primal.lift(sol.coeffs)
        outputs[i] = np.vdot(model.b, x)
        duals[i] = residual(model, x, omega).dual_norm
    estimates, _ = state_estimate_curve(model, primal, residual_space, grid)
    rom_seconds = time.perf_counter() - t0

    # spot-check the direct solver to report the online speedup
    sample = [grid[0], grid[grid.size // 2], grid[-1]]
    t0 = time.perf_counter()
    for w in sample:
        solve_fom(model, nudge_frequency(model, float(w), step))
    fom_per_point = (time.perf_counter() - t0) / len(sample)
    rom_per_point = rom_seconds / (2 * grid.size)  # output pass plus estimate pass

    write_sweep(
        out / "sweep.csv",
        grid,
        outputs,
        duals,
        estimates,
        {
            "basis_load_seconds": offline_seconds,
            "rom_sweep_seconds": rom_seconds,
            "rom_per_point_seconds": rom_per_point,
            "fom_per_point_seconds": fom_per_point,
            "speedup": fom_per_point / rom_per_point if rom_per_point > 0 else float("inf"),
        },
    )
    print(f"wrote {out / 'sweep.csv'}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    cfg = _load_config(args)
    model = build_model(cfg)
    if args.strategy:
        strategies = strategy_list(cfg, args.strategy)
    elif "greedy.strategy" in cfg.values:
        strategies = strategy_list(cfg)
    else:
        strategies = list(STRATEGIES)
    if len(strategies) < 2:
        raise ParseError("compare needs at least two strategies")
    out = Path(args.out)
    traces = {}
    rc = EXIT_OK
    for strategy in strategies:
        gconf = build_greedy_config(cfg, model, strategy, seed=args.seed, oracle=True)
        trace = run_greedy(model, gconf)
        traces[strategy] = trace
        write_trace(out / f"trace_{strategy}.csv", trace)
        print(_summary(trace))
        if not trace.converged:
            rc = EXIT_UNCONVERGED
    write_compare(out / "compare.csv", traces)
    print(f"wrote {out / 'compare.csv'}")
    return rc


def _cmd_oracle(args) -> int:
    cfg = _load_config(args)
    model = build_model(cfg)
    out = Path(args.out)
    grid = model.band.grid()
    step = model.band.step

    decomp = modal_decomposition(model)
    amps = coupling_coefficients(decomp, model).values
    write_spectral(
        out / "spectral.csv",
        decomp.omegas,
        amps,
        comments=[f"in_band_modes={decomp.count}"],
    )

    budget = cfg.get("sweep.mode_budget")
    outputs = np.zeros(grid.size, dtype=complex)
    for i, w in enumerate(grid):
        omega = nudge_frequency(model, float(w), step)
        x = modal_solve(model, omega, mode_budget=budget)
        outputs[i] = np.vdot(model.b, x)
    rows_path = out / "modal_sweep.csv"
    write_table(
        rows_path,
        ("omega", "re_y", "im_y"),
        [(w, y.real, y.imag) for w, y in zip(grid, outputs)],
        comments=[f"mode_budget={budget}"],
    )
    print(f"wrote {out / 'spectral.csv'}")
    print(f"wrote {rows_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rbsweep",
        description="Certified reduced-basis frequency sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="path to a section.key = value config file")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--seed", type=int, default=None, help="override greedy.seed")

    p = sub.add_parser("greedy", help="build reduced spaces, write traces and curves")
    common(p)
    p.add_argument(
        "--strategy",
        action="append",
        choices=STRATEGIES,
        default=None,
        help="strategy to run (repeatable; default from config)",
    )
    p.add_argument("--oracle", action="store_true", help="track the true indicator (slow)")
    p.set_defaults(func=_cmd_greedy)

    p = sub.add_parser("sweep", help="certified fast sweep over the band")
    common(p)
    p.add_argument("--basis", required=True, help="exported basis file from a greedy run")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("compare", help="race sampling strategies with the oracle on")
    common(p)
    p.add_argument(
        "--strategy",
        action="append",
        choices=STRATEGIES,
        default=None,
        help="strategy to include (repeatable; default: all)",
    )
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("oracle", help="modal reference outputs: resonance table and sweep")
    common(p)
    p.set_defaults(func=_cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RBSweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
