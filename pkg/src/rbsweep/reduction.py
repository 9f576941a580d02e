"""Reduced spaces, Galerkin solves, and the new-information norm.

Spaces keep an X-orthonormal basis (modified Gram-Schmidt in the energy inner
product with one reorthogonalization pass) next to the congruence-reduced
operators, so an online solve never touches a full-size matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import ReducedSingular, ZeroVector
from .fom import FullOrderModel, x_norm

# Candidate directions whose orthogonal remainder falls below this fraction of
# their own norm carry no new information and are rejected.
DROP_TOL = 1e-10

# Acceptable relative residual of a reduced solve; beyond it the reduced
# pencil is declared singular at that frequency.
REDUCED_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class ReducedSpace:
    """X-orthonormal basis with congruence-reduced operators.

    Instances are immutable; enrichment returns a new space and never touches
    the arrays of the old one, so snapshots of the space stay valid.
    """

    model: FullOrderModel
    basis: np.ndarray
    reduced_k: np.ndarray
    reduced_m: np.ndarray
    reduced_b: np.ndarray
    label: str = "primal"

    @property
    def size(self) -> int:
        return int(self.basis.shape[1])

    def lift(self, coeffs: np.ndarray) -> np.ndarray:
        """Full-size vector represented by reduced coordinates."""
        return self.basis @ coeffs


@dataclass(frozen=True)
class RomSolution:
    """Reduced coordinates of the Galerkin solution at one frequency."""

    coeffs: np.ndarray
    omega: float


def empty_space(model: FullOrderModel, label: str = "primal") -> ReducedSpace:
    return ReducedSpace(
        model=model,
        basis=np.zeros((model.n, 0), dtype=complex),
        reduced_k=np.zeros((0, 0), dtype=complex),
        reduced_m=np.zeros((0, 0), dtype=complex),
        reduced_b=np.zeros(0, dtype=complex),
        label=label,
    )


def _orthogonal_remainder(space: ReducedSpace, v: np.ndarray) -> np.ndarray:
    # Two projection passes keep the Gram identity near machine precision.
    w = np.asarray(v, dtype=complex).copy()
    if space.size == 0:
        return w
    X = space.model.X
    for _ in range(2):
        w -= space.basis @ (space.basis.conj().T @ (X @ w))
    return w


def enrich(space: ReducedSpace, v: np.ndarray, drop_tol: float = DROP_TOL) -> tuple[ReducedSpace, bool]:
    """Orthonormalize ``v`` against the space and append it when it adds information.

    Returns ``(new_space, True)`` on acceptance or ``(space, False)`` when the
    remainder norm falls below ``drop_tol`` times the candidate norm.
    """
    model = space.model
    scale = x_norm(model, v)
    w = _orthogonal_remainder(space, v)
    rem = x_norm(model, w)
    if rem <= drop_tol * scale or rem == 0.0:
        return space, False
    q = w / rem
    basis = np.hstack([space.basis, q[:, None]])
    # Rebuild by congruence; spaces stay small, so this is cheap and keeps the
    # reduced operators exactly consistent with the stored basis.
    reduced_k = basis.conj().T @ (model.K @ basis)
    reduced_m = basis.conj().T @ (model.M @ basis)
    reduced_b = basis.conj().T @ model.b
    return (
        ReducedSpace(
            model=model,
            basis=basis,
            reduced_k=reduced_k,
            reduced_m=reduced_m,
            reduced_b=reduced_b,
            label=space.label,
        ),
        True,
    )


def from_vectors(
    model: FullOrderModel, vectors, label: str = "primal", drop_tol: float = DROP_TOL
) -> ReducedSpace:
    """Space spanned by ``vectors``, enriched in the given order."""
    space = empty_space(model, label)
    for v in vectors:
        space, _ = enrich(space, v, drop_tol)
    return space


def solve_reduced_system(
    reduced_k: np.ndarray, reduced_m: np.ndarray, rhs: np.ndarray, omega: float
) -> np.ndarray:
    """Solve ``(K_r - omega**2 M_r) c = rhs`` with a singularity guard."""
    A = reduced_k - omega**2 * reduced_m
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros(rhs.shape, dtype=complex)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(A)
            c = scipy.linalg.lu_solve((lu, piv), rhs)
            c = c + scipy.linalg.lu_solve((lu, piv), rhs - A @ c)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise ReducedSingular(f"reduced pencil singular at omega={omega!r}") from exc
    rel = float(np.linalg.norm(rhs - A @ c)) / rhs_norm
    if not np.all(np.isfinite(c)) or rel > REDUCED_RTOL:
        raise ReducedSingular(
            f"reduced solve at omega={omega!r} stalled at relative residual {rel:.3e}"
        )
    return c


def solve_rom(space: ReducedSpace, model: FullOrderModel, omega: float) -> RomSolution:
    """Galerkin solution on the space at ``omega``.

    The reduced residual is forced below ``1e-9`` relative, which is the
    discrete Galerkin orthogonality statement ``basis^H (f - A lift(c)) = 0``.
    """
    if space.size == 0:
        raise ValueError("cannot solve on an empty space")
    rhs = 1j * omega * space.reduced_b
    coeffs = solve_reduced_system(space.reduced_k, space.reduced_m, rhs, omega)
    return RomSolution(coeffs=coeffs, omega=omega)


def new_information_norm(space: ReducedSpace, e: np.ndarray) -> float:
    """Energy norm of the component of ``e / ||e||`` outside the space.

    Normalizing first makes the value scale-free and pins it to ``[0, 1]``:
    1 means a fully new direction, 0 a captured one.  An empty space knows
    nothing, so every nonzero vector scores 1.
    """
    model = space.model
    scale = x_norm(model, e)
    if scale == 0.0:
        raise ZeroVector("new information norm of the zero vector is undefined")
    if space.size == 0:
        return 1.0
    rem = _orthogonal_remainder(space, np.asarray(e) / scale)
    return min(x_norm(model, rem), 1.0)


def compose_residual_space(primal: ReducedSpace, extra, drop_tol: float = DROP_TOL) -> ReducedSpace:
    """Residual-equation space: the primal basis extended by ``extra`` vectors in order."""
    space = replace(primal, label="residual")
    for v in extra:
        space, _ = enrich(space, v, drop_tol)
    return space
