"""Error estimation: residual dual norms, inf-sup bounds, dual-space state estimates.

Three indicators are compared throughout.  The oracle-grade true indicator
measures, frequency by frequency, how much of the direct solution the space
has not captured.  The state estimator solves the error equation projected on
a residual space; the residual dual norm is the classical certificate
ingredient.  All three report the new-information norm at their own argmax,
which makes their stopping decisions directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivisionByZeroTrueError, ReducedSingular, ResonantBound
from .fom import (
    DENSE_EIG_LIMIT,
    FullOrderModel,
    assemble,
    eigenvalues_near,
    is_near_resonance,
    nudge_frequency,
    pencil_eigenvalues,
    solve_fom,
    x_norm,
    x_solve,
)
from .reduction import ReducedSpace, new_information_norm, solve_reduced_system, solve_rom
from .spectral import compute_inband_modes

# Inf-sup values at or below this are treated as exact resonances.
BETA_FLOOR = 1e-12


@dataclass(frozen=True)
class ResidualData:
    """Residual vector of an approximation and its X**-1 dual norm."""

    r: np.ndarray
    omega: float
    dual_norm: float


@dataclass(frozen=True)
class IndicatorReport:
    """The three indicators on one space, with the frequencies each one selected."""

    epsilon_true: float
    epsilon_state: float
    epsilon_res: float
    effectivity: float
    argmax_freqs: dict


def residual(model: FullOrderModel, e_approx: np.ndarray, omega: float) -> ResidualData:
    """Residual ``i omega b - (K - omega**2 M) e_approx`` with its dual norm."""
    inst = assemble(model, omega)
    r = inst.f - inst.A @ e_approx
    dual_sq = np.vdot(r, x_solve(model, r)).real
    return ResidualData(r=r, omega=omega, dual_norm=float(np.sqrt(max(dual_sq, 0.0))))


def inf_sup(model: FullOrderModel, omega: float) -> float:
    """Stability constant ``beta(omega)`` of the frequency-fixed operator.

    For the symmetric pencil the smallest singular value of
    ``X**-1/2 (K - omega**2 M) X**-1/2`` has the closed form
    ``min_n |lambda_n - omega**2| / (lambda_n + 1)`` over the pencil
    eigenvalues, and the minimum is attained at one of the two eigenvalues
    bracketing ``omega**2``.
    """
    if omega < 0:
        raise ValueError("omega must be nonnegative")
    sq = omega**2
    lam = eigenvalues_near(model, sq, k=4)
    return float(np.min(np.abs(lam - sq) / (lam + 1.0)))


def classical_error_bound(model: FullOrderModel, space: ReducedSpace, omega: float) -> float:
    """Residual dual norm of the Galerkin solution divided by ``beta(omega)``.

    A rigorous X-norm error bound away from resonances; raises
    :class:`ResonantBound` once ``beta`` falls to the resonance floor, where
    the quotient certifies nothing.
    """
    beta = inf_sup(model, omega)
    if beta <= BETA_FLOOR:
        raise ResonantBound(f"inf-sup constant {beta:.3e} at omega={omega!r}")
    sol = solve_rom(space, model, omega)
    data = residual(model, space.lift(sol.coeffs), omega)
    return data.dual_norm / beta


def state_error_estimate(
    model: FullOrderModel,
    primal: ReducedSpace,
    residual_space: ReducedSpace,
    omega: float,
) -> tuple[float, np.ndarray]:
    """Error-equation solve projected on the residual space.

    Solves the primal Galerkin problem, forms its residual ``r``, and projects
    the error equation onto ``residual_space`` with right-hand side ``W^H r``.
    Returns the energy norm of the reconstructed error field together with the
    field itself.  With the residual space equal to the primal one the
    right-hand side is Galerkin-orthogonal and the estimate collapses to zero,
    whatever the true error; the statics direction is what rescues it.
    """
    if residual_space.label != "residual":
        raise ValueError("residual_space must carry the 'residual' label")
    if residual_space.size == 0:
        raise ValueError("residual space is empty")
    sol = solve_rom(primal, model, omega)
    data = residual(model, primal.lift(sol.coeffs), omega)
    rhs = residual_space.basis.conj().T @ data.r
    # V^H r = 0 exactly by Galerkin orthogonality; the leading block of W is V
    # verbatim, so enforce the zero rather than let round-off through, where a
    # near-singular mode row would amplify it into a spurious estimate spike.
    rhs[: primal.size] = 0.0
    coeffs = solve_reduced_system(
        residual_space.reduced_k, residual_space.reduced_m, rhs, omega
    )
    err = residual_space.lift(coeffs)
    return x_norm(model, err), err


# ---------------------------------------------------------------------------
# grid curves


def _nudged(model: FullOrderModel, omega: float, step: float) -> float:
    return nudge_frequency(model, omega, step) if is_near_resonance(model, omega) else omega


def _pole_candidates(model: FullOrderModel, grid: np.ndarray) -> np.ndarray:
    if model.n <= DENSE_EIG_LIMIT:
        return pencil_eigenvalues(model)
    inband = compute_inband_modes(model).omegas ** 2
    lo = eigenvalues_near(model, float(grid[0]) ** 2, k=4)
    hi = eigenvalues_near(model, float(grid[-1]) ** 2, k=4)
    return np.unique(np.concatenate([inband, lo, hi]))


def pole_sitting_mask(model: FullOrderModel, grid: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Grid points whose ``omega**2`` lies within relative ``rtol`` of a pole.

    Reduced solves are not safe at these points either: a basis holding an
    exact in-band eigenvector inherits that pole exactly, and the near-singular
    reduced solve amplifies round-off into arbitrarily large curve values.
    Curve evaluators shift such points by half a grid step, mirroring what
    :func:`nudge_frequency` does for full-order solves.
    """
    lam = _pole_candidates(model, grid)
    sq = np.asarray(grid, dtype=float) ** 2
    gaps = np.min(np.abs(lam[None, :] - sq[:, None]), axis=1)
    scale = np.maximum(sq, float(np.abs(lam).max()))
    return gaps <= rtol * np.maximum(scale, 1e-300)


def grid_eval_points(model: FullOrderModel, grid: np.ndarray) -> np.ndarray:
    """The frequencies the curve evaluators actually solve at, pole-shifted."""
    grid = np.asarray(grid, dtype=float)
    step = grid[1] - grid[0] if grid.size > 1 else 1.0
    points = grid.copy()
    mask = pole_sitting_mask(model, grid)
    for i in np.flatnonzero(mask):
        shifted = grid[i] + 0.5 * step
        points[i] = shifted if shifted <= model.band.omega_max else grid[i] - 0.5 * step
    return points


def true_error_curve(model: FullOrderModel, space: ReducedSpace, grid: np.ndarray) -> np.ndarray:
    """New-information norm of the direct solution at every grid frequency.

    Oracle-grade: one full-order solve per point.  Frequencies sitting on a
    resonance are evaluated half a grid step away.
    """
    step = grid[1] - grid[0] if grid.size > 1 else 1.0
    vals = np.empty(grid.size)
    for i, w in enumerate(grid):
        x = solve_fom(model, _nudged(model, w, step))
        vals[i] = new_information_norm(space, x)
    return vals


def state_estimate_curve(
    model: FullOrderModel,
    primal: ReducedSpace,
    residual_space: ReducedSpace,
    grid: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """State-error estimate at every grid frequency, with a validity mask.

    Pole-sitting grid points are evaluated half a step away up front; points
    where the reduced pencil still turns out singular are retried half a step
    further, and one that fails both is masked out instead of poisoning the
    argmax.
    """
    step = grid[1] - grid[0] if grid.size > 1 else 1.0
    points = grid_eval_points(model, grid)
    vals = np.zeros(grid.size)
    ok = np.ones(grid.size, dtype=bool)
    for i, w in enumerate(points):
        try:
            vals[i], _ = state_error_estimate(model, primal, residual_space, w)
        except ReducedSingular:
            try:
                vals[i], _ = state_error_estimate(
                    model, primal, residual_space, w + 0.5 * step
                )
            except ReducedSingular:
                ok[i] = False
    return vals, ok


def residual_norm_curve(
    model: FullOrderModel, space: ReducedSpace, grid: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Residual dual norm of the Galerkin solution at every grid frequency."""
    step = grid[1] - grid[0] if grid.size > 1 else 1.0
    points = grid_eval_points(model, grid)
    vals = np.zeros(grid.size)
    ok = np.ones(grid.size, dtype=bool)
    for i, w in enumerate(points):
        try:
            sol = solve_rom(space, model, w)
            vals[i] = residual(model, space.lift(sol.coeffs), w).dual_norm
        except ReducedSingular:
            try:
                w2 = w + 0.5 * step
                sol = solve_rom(space, model, w2)
                vals[i] = residual(model, space.lift(sol.coeffs), w2).dual_norm
            except ReducedSingular:
                ok[i] = False
    return vals, ok


def inf_sup_curve(model: FullOrderModel, grid: np.ndarray) -> np.ndarray:
    """``beta(omega)`` over the grid from one eigenvalue harvest.

    The minimizer at any ``omega`` is one of the eigenvalues bracketing
    ``omega**2``, and every bracketing eigenvalue for an in-band frequency is
    either in the band or the nearest one outside an endpoint, so a single
    candidate set serves the whole grid.
    """
    if model.n <= DENSE_EIG_LIMIT:
        lam = pencil_eigenvalues(model)
    else:
        inband = compute_inband_modes(model).omegas ** 2
        lo = eigenvalues_near(model, float(grid[0]) ** 2, k=4)
        hi = eigenvalues_near(model, float(grid[-1]) ** 2, k=4)
        lam = np.unique(np.concatenate([inband, lo, hi]))
    sq = np.asarray(grid, dtype=float) ** 2
    return np.min(np.abs(lam[None, :] - sq[:, None]) / (lam[None, :] + 1.0), axis=1)


def certification_curves(
    model: FullOrderModel,
    primal: ReducedSpace,
    residual_space: ReducedSpace | None,
    grid: np.ndarray,
):
    """Dual norm, state estimate, inf-sup, and classical bound over the grid.

    The bound column is the dual norm over ``beta`` where ``beta`` clears the
    resonance floor and infinity where it does not; the estimate column is
    ``None`` when no residual space is supplied.
    """
    duals, dual_ok = residual_norm_curve(model, primal, grid)
    if residual_space is not None and residual_space.size > 0:
        estimates, _ = state_estimate_curve(model, primal, residual_space, grid)
    else:
        estimates = None
    betas = inf_sup_curve(model, grid)
    bounds = np.where(
        (betas > BETA_FLOOR) & dual_ok, duals / np.maximum(betas, BETA_FLOOR), np.inf
    )
    return duals, estimates, betas, bounds


def _argmax_lowest(grid: np.ndarray, vals: np.ndarray, ok: np.ndarray | None = None) -> int:
    # np.argmax returns the first (lowest-frequency) index among ties.
    if ok is None:
        return int(np.argmax(vals))
    masked = np.where(ok, vals, -np.inf)
    return int(np.argmax(masked))


# ---------------------------------------------------------------------------
# indicators


def indicator_true(
    model: FullOrderModel, space: ReducedSpace, grid: np.ndarray
) -> tuple[float, float]:
    """Worst new-information norm over the grid and the frequency attaining it."""
    vals = true_error_curve(model, space, grid)
    idx = _argmax_lowest(grid, vals)
    return float(vals[idx]), float(grid[idx])


def indicator_state(
    model: FullOrderModel,
    primal: ReducedSpace,
    residual_space: ReducedSpace,
    grid: np.ndarray,
) -> tuple[float, float]:
    """New-information norm at the state-estimate argmax (one direct solve)."""
    vals, ok = state_estimate_curve(model, primal, residual_space, grid)
    idx = _argmax_lowest(grid, vals, ok)
    step = grid[1] - grid[0] if grid.size > 1 else 1.0
    x = solve_fom(model, _nudged(model, float(grid[idx]), step))
    return new_information_norm(primal, x), float(grid[idx])


def indicator_res(
    model: FullOrderModel, space: ReducedSpace, grid: np.ndarray
) -> tuple[float, float]:
    """New-information norm at the residual dual norm argmax (one direct solve)."""
    vals, ok = residual_norm_curve(model, space, grid)
    idx = _argmax_lowest(grid, vals, ok)
    step = grid[1] - grid[0] if grid.size > 1 else 1.0
    x = solve_fom(model, _nudged(model, float(grid[idx]), step))
    return new_information_norm(space, x), float(grid[idx])


def effectivity(epsilon: float, epsilon_true: float) -> float:
    """Ratio of an indicator to the true one; undefined when the truth is zero."""
    if epsilon_true <= 0.0:
        raise DivisionByZeroTrueError("true-error indicator is zero")
    return epsilon / epsilon_true


def indicator_report(
    model: FullOrderModel,
    space: ReducedSpace,
    residual_space: ReducedSpace,
    grid: np.ndarray,
) -> IndicatorReport:
    """All three indicators on one space, plus the state estimator's effectivity."""
    eps_true, at_true = indicator_true(model, space, grid)
    eps_state, at_state = indicator_state(model, space, residual_space, grid)
    eps_res, at_res = indicator_res(model, space, grid)
    return IndicatorReport(
        epsilon_true=eps_true,
        epsilon_state=eps_state,
        epsilon_res=eps_res,
        effectivity=effectivity(eps_state, eps_true),
        argmax_freqs={"true": at_true, "state": at_state, "res": at_res},
    )
