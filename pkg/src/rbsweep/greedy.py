"""Greedy sampling strategies for building the sweep spaces.

Three strategies share one trace format.  The headline strategy seeds the
primal space with the in-band eigenmodes, keeps the statics direction in the
residual space, and samples wherever the state-error estimate peaks.  The
two-stream reference strategy grows primal and residual spaces from separate
argmax streams and pays one extra full-size solve per iteration.  The
baseline swaps the selector for the residual dual norm, which is what the
comparison harness is there to expose.

Every sampled frequency contributes one trace row.  Its ``xi`` is the
new-information norm of the snapshot against the space built so far, so rows
during eigenmode insertion are exactly 1.0 by construction (each eigenmode is
X-orthogonal to everything before it) and stopping compares like with like
across strategies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ReducedSingular
from .estimators import (
    grid_eval_points,
    indicator_true,
    residual,
    residual_norm_curve,
    state_estimate_curve,
)
from .fom import (
    FullOrderModel,
    nudge_frequency,
    solve_fom,
    solve_system,
    x_norm,
    x_solve,
)
from .reduction import (
    ReducedSpace,
    compose_residual_space,
    empty_space,
    enrich,
    new_information_norm,
    solve_reduced_system,
    solve_rom,
)
from .spectral import compute_inband_modes, compute_statics

# Curve maxima at or below this mean the estimator sees nothing left anywhere;
# sampling the argmax again would only duplicate a frequency.
EXHAUSTION_TOL = 1e-9

STRATEGIES = ("algorithm1", "algorithm2", "residual_baseline")


@dataclass(frozen=True)
class GreedyConfig:
    """Run settings shared by all strategies.

    ``max_iters`` defaults to the full-order dimension; ``seed`` drives the
    endpoint coin flip and the initial samples of the two-stream strategy.
    ``alg1_stopping`` selects the two-stream stopping value: the comparable
    state indicator (default) or the raw estimator norm.
    """

    grid: np.ndarray
    tol: float = 2e-7
    max_iters: int | None = None
    seed: int = 0
    strategy: str = "algorithm2"
    oracle: bool = False
    alg1_stopping: str = "state"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.alg1_stopping not in ("state", "estimator"):
            raise ValueError(f"unknown alg1_stopping {self.alg1_stopping!r}")
        if np.asarray(self.grid).size < 2:
            raise ValueError("candidate grid needs at least two points")


@dataclass(frozen=True)
class TraceRow:
    """One sampled frequency: stopping value, optional indicators, space sizes."""

    iteration: int
    omega: float
    xi: float | None
    eps_true: float | None
    eps_state: float | None
    eps_res: float | None
    m_primal: int
    m_residual: int | None


@dataclass
class GreedyTrace:
    """Per-iteration record of one greedy run plus the final spaces."""

    strategy: str
    rows: list[TraceRow] = field(default_factory=list)
    converged: bool = False
    primal: ReducedSpace | None = None
    residual_space: ReducedSpace | None = None
    events: list[str] = field(default_factory=list)
    final_eps_true: float | None = None

    @property
    def sampled(self) -> list[float]:
        return [row.omega for row in self.rows]


def _oracle_value(model, space, grid, enabled: bool) -> float | None:
    if not enabled:
        return None
    if space.size == 0:
        return 1.0
    return indicator_true(model, space, grid)[0]


def _endpoint(grid: np.ndarray, rng: np.random.Generator) -> tuple[float, str]:
    side = int(rng.integers(2))
    return (float(grid[0]), "min") if side == 0 else (float(grid[-1]), "max")


def _eigenphase(model, config, trace, max_iters) -> tuple[ReducedSpace, int, bool]:
    """Insert the in-band eigenmodes, one trace row each, xi = 1.0 by construction."""
    decomp = compute_inband_modes(model)
    space = empty_space(model, label="primal")
    it = 0
    for omega_n, mode in zip(decomp.omegas, decomp.modes.T):
        if it >= max_iters:
            return space, it, True
        space, _ = enrich(space, mode)
        it += 1
        trace.rows.append(
            TraceRow(
                iteration=it,
                omega=float(omega_n),
                xi=1.0,
                eps_true=1.0 if config.oracle else None,
                eps_state=1.0 if config.strategy != "residual_baseline" else None,
                eps_res=1.0 if config.strategy == "residual_baseline" else None,
                m_primal=space.size,
                m_residual=None,
            )
        )
    return space, it, False


def _statics_seed(model) -> list[np.ndarray]:
    f0 = compute_statics(model)
    return [f0] if x_norm(model, f0) > 0.0 else []


def _fix_residual_sizes(trace: GreedyTrace, extra: int) -> None:
    # Eigenphase and endpoint rows predate the first composition; their
    # residual size is the primal size plus the statics direction.
    trace.rows = [
        row if row.m_residual is not None else _with_m_residual(row, row.m_primal + extra)
        for row in trace.rows
    ]


def _with_m_residual(row: TraceRow, m_residual: int) -> TraceRow:
    return TraceRow(
        iteration=row.iteration,
        omega=row.omega,
        xi=row.xi,
        eps_true=row.eps_true,
        eps_state=row.eps_state,
        eps_res=row.eps_res,
        m_primal=row.m_primal,
        m_residual=m_residual,
    )


def _sample_and_enrich(model, config, trace, space, omega_nominal, grid, is_state):
    """Solve at a (possibly nudged) frequency, record its row, enrich the space."""
    step = grid[1] - grid[0]
    omega_eval = nudge_frequency(model, float(omega_nominal), step)
    if omega_eval != omega_nominal:
        trace.events.append(f"nudged omega={omega_nominal!r} to {omega_eval!r}")
    eps_true = _oracle_value(model, space, grid, config.oracle)
    snapshot = solve_fom(model, omega_eval)
    xi = new_information_norm(space, snapshot)
    space, added = enrich(space, snapshot)
    if not added:
        trace.events.append(f"snapshot at omega={omega_eval!r} rejected as captured")
    trace.rows.append(
        TraceRow(
            iteration=len(trace.rows) + 1,
            omega=omega_eval,
            xi=xi,
            eps_true=eps_true,
            eps_state=xi if is_state else None,
            eps_res=None if is_state else xi,
            m_primal=space.size,
            m_residual=None,
        )
    )
    return space, xi


def _run_estimate_greedy(model: FullOrderModel, config: GreedyConfig, use_residual_selector: bool) -> GreedyTrace:
    """Shared skeleton: eigenphase, endpoint sample, selector-driven loop."""
    strategy = "residual_baseline" if use_residual_selector else "algorithm2"
    trace = GreedyTrace(strategy=strategy)
    grid = np.asarray(config.grid, dtype=float)
    rng = np.random.default_rng(config.seed)
    max_iters = config.max_iters if config.max_iters is not None else model.n
    is_state = not use_residual_selector

    space, it, capped = _eigenphase(model, config, trace, max_iters)
    seed_vectors = _statics_seed(model) if is_state else []
    if capped:
        _finish(model, config, trace, space, seed_vectors, is_state, grid, converged=False)
        return trace

    def complete(space):
        # a primal space spanning all of R^n makes the Galerkin solve exact
        if space.size >= model.n:
            trace.events.append(f"primal space complete at size {space.size}")
            return True
        return False

    endpoint, side = _endpoint(grid, rng)
    trace.events.append(f"endpoint_sample side={side} omega={endpoint!r}")
    sampled = {endpoint}
    space, xi = _sample_and_enrich(model, config, trace, space, endpoint, grid, is_state)
    converged = xi <= config.tol or complete(space)

    while not converged and len(trace.rows) < max_iters:
        if use_residual_selector:
            vals, ok = residual_norm_curve(model, space, grid)
        else:
            residual_space = compose_residual_space(space, seed_vectors)
            vals, ok = state_estimate_curve(model, space, residual_space, grid)
        if not ok.any():
            trace.events.append("estimator curve failed everywhere")
            break
        masked = np.where(ok, vals, -np.inf)
        idx = int(np.argmax(masked))
        omega_star = float(grid[idx])
        if masked[idx] <= EXHAUSTION_TOL or omega_star in sampled:
            trace.events.append(f"selector exhausted at value {float(masked[idx]):.3e}")
            converged = True
            break
        sampled.add(omega_star)
        space, xi = _sample_and_enrich(model, config, trace, space, omega_star, grid, is_state)
        converged = xi <= config.tol or complete(space)

    _finish(model, config, trace, space, seed_vectors, is_state, grid, converged)
    return trace


def _finish(model, config, trace, space, seed_vectors, is_state, grid, converged):
    trace.converged = converged
    trace.primal = space
    if is_state:
        trace.residual_space = compose_residual_space(space, seed_vectors)
        _fix_residual_sizes(trace, len(seed_vectors))
    if config.oracle:
        trace.final_eps_true = indicator_true(model, space, grid)[0]


def run_algorithm2(model: FullOrderModel, config: GreedyConfig) -> GreedyTrace:
    """Eigenmode-seeded greedy driven by the state-error estimate.

    Step order per iteration: Galerkin solve on the primal space, residual
    space = primal plus the statics direction, estimate curve over the grid,
    argmax sample (ties resolve to the lowest frequency), one direct solve,
    enrichment.  Stops once the sampled snapshot's new-information norm falls
    to ``tol``.  The first sample after the eigenmodes is a band endpoint
    picked by a seeded coin flip: with a pure eigenmode basis every estimator
    is flat across the band, so the endpoints are the principled opener.
    """
    return _run_estimate_greedy(model, config, use_residual_selector=False)


def run_residual_baseline(model: FullOrderModel, config: GreedyConfig) -> GreedyTrace:
    """Same skeleton with the residual dual norm as the selector.

    Kept as a foil: the residual underweights exactly the content the space
    still misses, so its argmax stops rewarding genuinely new frequencies
    before the state-driven run does.
    """
    return _run_estimate_greedy(model, config, use_residual_selector=True)


def _alg1_curves(model, primal, residual_space, grid):
    """Estimate norm and second-level residual dual norm over the grid.

    The second-level residual ``r(omega) - A(omega) err(omega)`` measures what
    the estimated error field itself fails to explain; its argmax feeds the
    residual-space stream.
    """
    step = grid[1] - grid[0]
    points = grid_eval_points(model, grid)
    est = np.zeros(grid.size)
    second = np.zeros(grid.size)
    ok = np.ones(grid.size, dtype=bool)
    for i, w in enumerate(points):
        for omega in (float(w), float(w) + 0.5 * step):
            try:
                sol = solve_rom(primal, model, omega)
                data = residual(model, primal.lift(sol.coeffs), omega)
                rhs = residual_space.basis.conj().T @ data.r
                # Galerkin orthogonality: the primal block of W^H r is exactly zero
                rhs[: primal.size] = 0.0
                coeffs = solve_reduced_system(
                    residual_space.reduced_k, residual_space.reduced_m, rhs, omega
                )
                err = residual_space.lift(coeffs)
                est[i] = x_norm(model, err)
                A = model.K - omega**2 * model.M
                r2 = data.r - A @ err
                second[i] = float(np.sqrt(max(np.vdot(r2, x_solve(model, r2)).real, 0.0)))
                break
            except ReducedSingular:
                continue
        else:
            ok[i] = False
    return est, second, ok


def run_algorithm1(model: FullOrderModel, config: GreedyConfig) -> GreedyTrace:
    """Two-stream reference greedy with separately sampled residual space.

    Both streams start from random grid points (seeded, distinct).  Each
    iteration enriches the primal space with a direct solve at the primal
    sample and the residual space with a full-size error solve at the residual
    sample, then reads the next primal sample off the estimate argmax and the
    next residual sample off the second-level residual argmax.  When the two
    streams collide on one frequency, both spaces are enriched from it and the
    collision is logged.  The stopping value is the state indicator by default
    so runs compare like with like; ``alg1_stopping="estimator"`` keeps the
    raw estimate norm instead.

    Trace rows report ``m_residual`` as the storage cost of this scheme: the
    primal vectors plus every retained error snapshot.  On small models the
    composed space used for the actual estimate solves dedups to lower rank,
    so the row value can exceed ``trace.residual_space.size``.
    """
    trace = GreedyTrace(strategy="algorithm1")
    grid = np.asarray(config.grid, dtype=float)
    step = grid[1] - grid[0]
    rng = np.random.default_rng(config.seed)
    max_iters = config.max_iters if config.max_iters is not None else model.n
    use_state = config.alg1_stopping == "state"

    idx0, idx1 = (int(i) for i in rng.choice(grid.size, size=2, replace=False))
    omega_star, omega_eps = float(grid[idx0]), float(grid[idx1])
    trace.events.append(f"initial_samples omega_star={omega_star!r} omega_eps={omega_eps!r}")

    primal = empty_space(model, label="primal")
    err_snapshots: list[np.ndarray] = []
    sampled: set[float] = set()
    pending_estimate: float | None = None
    converged = False

    while len(trace.rows) < max_iters:
        omega_eval = nudge_frequency(model, omega_star, step)
        if omega_eval != omega_star:
            trace.events.append(f"nudged omega={omega_star!r} to {omega_eval!r}")
        eps_true = _oracle_value(model, primal, grid, config.oracle)
        snapshot = solve_fom(model, omega_eval)
        xi_state = new_information_norm(primal, snapshot)
        primal, added = enrich(primal, snapshot)
        if not added:
            trace.events.append(f"snapshot at omega={omega_eval!r} rejected as captured")
        sampled.add(omega_star)
        xi = xi_state if use_state else pending_estimate

        # residual-space stream: full-size error solve at its own sample
        omega_eps_eval = nudge_frequency(model, omega_eps, step)
        if omega_eps == omega_star:
            trace.events.append(f"stream_collision omega={omega_star!r}")
        try:
            sol = solve_rom(primal, model, omega_eps_eval)
        except ReducedSingular:
            omega_eps_eval = omega_eps_eval + 0.5 * step
            sol = solve_rom(primal, model, omega_eps_eval)
        data = residual(model, primal.lift(sol.coeffs), omega_eps_eval)
        err_snapshots.append(solve_system(model, omega_eps_eval, data.r))
        residual_space = compose_residual_space(primal, err_snapshots)

        trace.rows.append(
            TraceRow(
                iteration=len(trace.rows) + 1,
                omega=omega_eval,
                xi=xi,
                eps_true=eps_true,
                eps_state=xi_state,
                eps_res=None,
                m_primal=primal.size,
                # storage cost of the two-stream scheme: every error snapshot
                # is kept, though composition dedups spans for the solves
                m_residual=primal.size + len(err_snapshots),
            )
        )
        if xi is not None and xi <= config.tol:
            converged = True
            break
        if primal.size >= model.n:
            trace.events.append(f"primal space complete at size {primal.size}")
            converged = True
            break

        est, second, ok = _alg1_curves(model, primal, residual_space, grid)
        if not ok.any():
            trace.events.append("estimator curve failed everywhere")
            break
        est_masked = np.where(ok, est, -np.inf)
        sec_masked = np.where(ok, second, -np.inf)
        next_star = float(grid[int(np.argmax(est_masked))])
        omega_eps = float(grid[int(np.argmax(sec_masked))])
        pending_estimate = float(np.max(est_masked))
        if pending_estimate <= EXHAUSTION_TOL or next_star in sampled:
            trace.events.append(f"selector exhausted at value {pending_estimate:.3e}")
            converged = True
            break
        omega_star = next_star

    trace.converged = converged
    trace.primal = primal
    trace.residual_space = compose_residual_space(primal, err_snapshots)
    if config.oracle:
        trace.final_eps_true = indicator_true(model, primal, grid)[0]
    return trace


def run_greedy(model: FullOrderModel, config: GreedyConfig) -> GreedyTrace:
    """Dispatch on ``config.strategy``."""
    if config.strategy == "algorithm2":
        return run_algorithm2(model, config)
    if config.strategy == "algorithm1":
        return run_algorithm1(model, config)
    return run_residual_baseline(model, config)
