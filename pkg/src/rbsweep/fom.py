"""Full-order frequency-domain systems: assembly, direct solves, generators, import.

The engine works on the symmetric pencil ``(K, M)`` with ``K`` positive
semi-definite, ``M`` positive definite, and the one-port excitation
``f(omega) = i * omega * b``.  All accuracy statements are made in the energy
norm induced by ``X = K + M``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.io import mmread
from scipy.linalg import eigh
from scipy.sparse.linalg import eigsh, splu

from .errors import (
    DimensionMismatch,
    InvalidPort,
    MassNotPositiveDefinite,
    NotSymmetric,
    ParseError,
    SingularAtResonance,
)

# Dense generalized eigensolves below this size; shift-invert iteration above.
DENSE_EIG_LIMIT = 2000

# Relative omega**2 distance to a pencil eigenvalue treated as singular by the
# direct solver.
RESONANCE_RTOL = 1e-10

# Direct solves must meet this relative residual away from resonances.
SOLVE_RTOL = 1e-10


@dataclass(frozen=True)
class FrequencyBand:
    """Closed analysis band ``[omega_min, omega_max]`` with a uniform candidate grid."""

    omega_min: float
    omega_max: float
    grid_size: int = 1001

    def __post_init__(self):
        if not self.omega_min > 0:
            raise ValueError("omega_min must be positive")
        if not self.omega_max > self.omega_min:
            raise ValueError("omega_max must exceed omega_min")
        if self.grid_size < 2:
            raise ValueError("grid_size must be at least 2")

    def grid(self) -> np.ndarray:
        """Uniform closed grid including both endpoints."""
        return np.linspace(self.omega_min, self.omega_max, self.grid_size)

    @property
    def step(self) -> float:
        return (self.omega_max - self.omega_min) / (self.grid_size - 1)


@dataclass(frozen=True, eq=False)
class FullOrderModel:
    """Symmetric pencil ``(K, M)`` with excitation ``b`` and energy matrix ``X = K + M``.

    Immutable after construction and safe to share between workers; lazy
    factorizations live in an internal cache and are computed at most once.
    """

    K: sp.csr_matrix
    M: sp.csr_matrix
    b: np.ndarray
    X: sp.csr_matrix
    band: FrequencyBand
    n: int
    _cache: dict = field(default_factory=dict, repr=False)


@dataclass(frozen=True)
class SystemInstance:
    """Frequency-fixed system ``A x = f`` with ``A = K - omega**2 M`` and ``f = i omega b``."""

    A: sp.csr_matrix
    f: np.ndarray
    omega: float


def _as_csr(matrix) -> sp.csr_matrix:
    if sp.issparse(matrix):
        return matrix.tocsr()
    return sp.csr_matrix(np.asarray(matrix, dtype=float))


def _make_model(K, M, b, band) -> FullOrderModel:
    K = _as_csr(K)
    M = _as_csr(M)
    b = np.asarray(b)
    n = K.shape[0]
    return FullOrderModel(K=K, M=M, b=b, X=(K + M).tocsr(), band=band, n=n)


# ---------------------------------------------------------------------------
# generators


def make_resonator_chain(n: int, coupling: float, band: FrequencyBand) -> FullOrderModel:
    """Nearest-neighbour resonator chain driven at its first node.

    ``K`` is the tridiagonal Toeplitz matrix ``coupling * tridiag(-1, 2, -1)``,
    ``M`` the identity, ``b`` the first unit vector.  The pencil eigenvalues are
    ``2 * coupling * (1 - cos(k * pi / (n + 1)))`` for ``k = 1..n``, which tests
    use as a closed-form oracle.
    """
    if n < 2:
        raise ValueError("chain needs at least two resonators")
    if not coupling > 0:
        raise ValueError("coupling must be positive")
    main = 2.0 * coupling * np.ones(n)
    off = -coupling * np.ones(n - 1)
    K = sp.diags([off, main, off], [-1, 0, 1], format="csr")
    M = sp.identity(n, format="csr")
    b = np.zeros(n)
    b[0] = 1.0
    return _make_model(K, M, b, band)


def _fem_1d(elements: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    # Linear elements on [0, 1], homogeneous Dirichlet ends, interior nodes only.
    h = 1.0 / elements
    nin = elements - 1
    k_main = (2.0 / h) * np.ones(nin)
    k_off = (-1.0 / h) * np.ones(nin - 1)
    m_main = (4.0 * h / 6.0) * np.ones(nin)
    m_off = (h / 6.0) * np.ones(nin - 1)
    K = sp.diags([k_off, k_main, k_off], [-1, 0, 1], format="csr")
    M = sp.diags([m_off, m_main, m_off], [-1, 0, 1], format="csr")
    return K, M


def make_helmholtz_cavity(
    dim: int, elements_per_side: int, band: FrequencyBand, port_node: int
) -> FullOrderModel:
    """Dirichlet cavity on the unit interval or square, unit point load at ``port_node``.

    Uses linear finite elements on a uniform mesh.  In one dimension the pencil
    eigenvalues approximate ``(k * pi)**2``; the two-dimensional operator is the
    tensor product of the one-dimensional factors.  ``port_node`` indexes the
    interior degrees of freedom (0-based).
    """
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    if elements_per_side < 2:
        raise ValueError("need at least two elements per side")
    K1, M1 = _fem_1d(elements_per_side)
    if dim == 1:
        K, M = K1, M1
    else:
        K = (sp.kron(K1, M1) + sp.kron(M1, K1)).tocsr()
        M = sp.kron(M1, M1).tocsr()
    n = K.shape[0]
    if not 0 <= port_node < n:
        raise InvalidPort(f"port_node {port_node} outside interior range 0..{n - 1}")
    b = np.zeros(n)
    b[port_node] = 1.0
    return _make_model(K, M, b, band)


# ---------------------------------------------------------------------------
# import


def _read_matrix_file(path: Path) -> sp.csr_matrix:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    stripped = text.lstrip()
    if stripped.startswith("%%MatrixMarket"):
        try:
            mat = mmread(str(path))
        except Exception as exc:
            raise ParseError(f"invalid MatrixMarket file {path}: {exc}") from exc
        return _as_csr(mat)
    # Headerless coordinate text: size line "nrows ncols nnz", then 1-based
    # "i j value" triplets listing every stored entry.
    rows, cols, vals = [], [], []
    shape = None
    nnz = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("%")[0].split("#")[0].strip()
        if not line:
            continue
        parts = line.split()
        if shape is None:
            if len(parts) != 3:
                raise ParseError(f"{path}:{lineno}: expected size line 'nrows ncols nnz'")
            try:
                nr, nc, nnz = (int(p) for p in parts)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad size line") from exc
            shape = (nr, nc)
            continue
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected 'i j value' triplet")
        try:
            i, j = int(parts[0]), int(parts[1])
            v = float(parts[2])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad triplet") from exc
        if not (1 <= i <= shape[0] and 1 <= j <= shape[1]):
            raise ParseError(f"{path}:{lineno}: index out of range")
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
    if shape is None:
        raise ParseError(f"{path}: empty matrix file")
    if nnz is not None and len(vals) != nnz:
        raise ParseError(f"{path}: size line promises {nnz} entries, found {len(vals)}")
    return sp.coo_matrix((vals, (rows, cols)), shape=shape).tocsr()


def _read_vector_file(path: Path) -> np.ndarray:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("%")[0].split("#")[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (1, 2):
            raise ParseError(f"{path}:{lineno}: expected 're' or 're im'")
        try:
            re = float(parts[0])
            im = float(parts[1]) if len(parts) == 2 else 0.0
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad number") from exc
        entries.append(re + 1j * im)
    if not entries:
        raise ParseError(f"{path}: empty vector file")
    vec = np.asarray(entries)
    if np.all(vec.imag == 0.0):
        return vec.real
    return vec


def _check_symmetric(mat: sp.csr_matrix, name: str) -> None:
    diff = abs(mat - mat.T)
    scale = abs(mat).max() if mat.nnz else 0.0
    worst = diff.max() if diff.nnz else 0.0
    if worst > 1e-12 * max(scale, 1e-300):
        raise NotSymmetric(f"{name} is not symmetric: max asymmetry {worst:.3e}")


def _min_mass_eigenvalue(M: sp.csr_matrix) -> float:
    n = M.shape[0]
    if n <= DENSE_EIG_LIMIT:
        return float(np.linalg.eigvalsh(M.toarray()).min())
    # Shift-invert at a small negative shift; M - sigma*I is definite there.
    sigma = -1e-8 * max(abs(M).max(), 1.0)
    vals = eigsh(M, k=1, sigma=sigma, which="LM", return_eigenvectors=False)
    return float(vals.min())


def import_model(path_k, path_m, path_b, band: FrequencyBand) -> FullOrderModel:
    """Load ``(K, M, b)`` from disk and validate the pencil.

    Matrices are MatrixMarket coordinate files (``symmetric`` storage accepted)
    or headerless coordinate text listing every entry; ``b`` holds one complex
    entry per line as ``re im`` (a single number is taken as real).
    """
    K = _read_matrix_file(Path(path_k))
    M = _read_matrix_file(Path(path_m))
    b = _read_vector_file(Path(path_b))
    if K.shape[0] != K.shape[1] or M.shape[0] != M.shape[1]:
        raise DimensionMismatch("K and M must be square")
    if K.shape != M.shape:
        raise DimensionMismatch(f"K is {K.shape}, M is {M.shape}")
    if b.shape[0] != K.shape[0]:
        raise DimensionMismatch(f"b has length {b.shape[0]}, system size is {K.shape[0]}")
    _check_symmetric(K, "K")
    _check_symmetric(M, "M")
    min_eig = _min_mass_eigenvalue(M)
    if min_eig <= 0.0:
        raise MassNotPositiveDefinite(f"smallest mass eigenvalue {min_eig:.3e}")
    return _make_model(K, M, b, band)


# ---------------------------------------------------------------------------
# inner products and direct solves


def x_inner(model: FullOrderModel, u: np.ndarray, v: np.ndarray) -> complex:
    """Energy inner product ``v^H X u``."""
    return complex(np.vdot(v, model.X @ u))


def x_norm(model: FullOrderModel, u: np.ndarray) -> float:
    """Energy norm ``sqrt(u^H X u)``; the imaginary round-off is discarded."""
    return float(np.sqrt(max(x_inner(model, u, u).real, 0.0)))


def assemble(model: FullOrderModel, omega: float) -> SystemInstance:
    """Frequency-fixed operator and right-hand side at ``omega >= 0``."""
    if omega < 0:
        raise ValueError("omega must be nonnegative")
    A = (model.K - omega**2 * model.M).tocsr()
    f = 1j * omega * model.b
    return SystemInstance(A=A, f=f, omega=omega)


def _lu_solve_real(lu, rhs: np.ndarray) -> np.ndarray:
    # SuperLU factors are real here; complex right-hand sides split into parts.
    if np.iscomplexobj(rhs):
        return lu.solve(rhs.real.astype(float)) + 1j * lu.solve(rhs.imag.astype(float))
    return lu.solve(rhs.astype(float))


def solve_system(model: FullOrderModel, omega: float, rhs: np.ndarray) -> np.ndarray:
    """Solve ``(K - omega**2 M) x = rhs`` with one refinement step.

    Raises :class:`SingularAtResonance` when the factorization fails or the
    relative residual cannot be brought below ``1e-10``, which happens exactly
    when ``omega**2`` sits within relative distance ``1e-10`` of a pencil
    eigenvalue.
    """
    A = (model.K - omega**2 * model.M).tocsc()
    rhs = np.asarray(rhs)
    rhs_norm = float(np.linalg.norm(rhs))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sp.SparseEfficiencyWarning)
        try:
            lu = splu(A)
        except RuntimeError as exc:
            raise SingularAtResonance(
                f"factorization failed at omega={omega!r}: {exc}"
            ) from exc
    x = _lu_solve_real(lu, rhs)
    r = rhs - A @ x
    x = x + _lu_solve_real(lu, r)
    r = rhs - A @ x
    if rhs_norm > 0.0:
        rel = float(np.linalg.norm(r)) / rhs_norm
    else:
        rel = 0.0 if np.all(np.isfinite(x)) else np.inf
    if not np.all(np.isfinite(x)) or rel > SOLVE_RTOL:
        raise SingularAtResonance(
            f"solve at omega={omega!r} stalled at relative residual {rel:.3e}; "
            "omega**2 is at or next to a pencil eigenvalue"
        )
    return x


def solve_fom(model: FullOrderModel, omega: float) -> np.ndarray:
    """Direct solution of ``(K - omega**2 M) x = i omega b``."""
    inst = assemble(model, omega)
    return solve_system(model, omega, inst.f)


# ---------------------------------------------------------------------------
# pencil spectrum helpers (lazy, cached on the model)


def pencil_eig(model: FullOrderModel) -> tuple[np.ndarray, np.ndarray]:
    """Full dense pencil eigendecomposition with X-orthonormal eigenvectors.

    Only available for models up to ``DENSE_EIG_LIMIT`` unknowns; larger models
    must go through the banded shift-invert path in :mod:`rbsweep.spectral`.
    Eigenvalues come back ascending; column ``k`` of the eigenvector matrix is
    normalized to unit energy norm, obtained from the M-normalized eigenvector
    by dividing by ``sqrt(lambda_k + 1)``.
    """
    cached = model._cache.get("pencil")
    if cached is not None:
        return cached
    if model.n > DENSE_EIG_LIMIT:
        raise ValueError(
            f"dense eigendecomposition limited to n <= {DENSE_EIG_LIMIT}, model has {model.n}"
        )
    lam, vecs = eigh(model.K.toarray(), model.M.toarray())
    lam = np.maximum(lam, 0.0)  # K is PSD; clip eigensolver round-off
    vecs = vecs / np.sqrt(lam + 1.0)
    model._cache["pencil"] = (lam, vecs)
    return lam, vecs


def pencil_eigenvalues(model: FullOrderModel) -> np.ndarray:
    return pencil_eig(model)[0]


def eigenvalues_near(model: FullOrderModel, target_sq: float, k: int = 4) -> np.ndarray:
    """Pencil eigenvalues nearest ``target_sq``; shift-invert probe on large models."""
    if model.n <= DENSE_EIG_LIMIT:
        lam = pencil_eigenvalues(model)
        order = np.argsort(np.abs(lam - target_sq))
        return lam[order[: min(k, lam.size)]]
    sigma = target_sq
    scale = max(abs(target_sq), 1.0)
    for attempt in range(4):
        try:
            vals = eigsh(
                model.K,
                k=min(k, model.n - 1),
                M=model.M,
                sigma=sigma,
                which="LM",
                return_eigenvectors=False,
            )
            return np.sort(vals)
        except RuntimeError:
            # sigma hit the spectrum; jitter the shift and retry
            sigma = target_sq + scale * 1e-6 * (attempt + 1)
    raise SingularAtResonance(f"shift-invert probe failed near omega**2={target_sq!r}")


def is_near_resonance(model: FullOrderModel, omega: float, rtol: float = 1e-9) -> bool:
    """True when ``omega**2`` lies within relative ``rtol`` of a pencil eigenvalue."""
    sq = omega**2
    lam = eigenvalues_near(model, sq, k=2)
    gap = np.abs(lam - sq).min()
    return bool(gap <= rtol * max(sq, float(np.abs(lam).max()), 1e-300))


def nudge_frequency(model: FullOrderModel, omega: float, step: float) -> float:
    """Shift ``omega`` by half a grid step when it sits on a resonance.

    Full-order evaluations always use the nudged point.  Estimator curves
    apply the same shift to pole-sitting grid points: a basis holding an
    exact in-band eigenvector inherits the pole, so the reduced solve there
    is as unsafe as the full one.
    """
    if not is_near_resonance(model, omega):
        return omega
    candidate = omega + 0.5 * step
    if candidate > model.band.omega_max or is_near_resonance(model, candidate):
        candidate = omega - 0.5 * step
    return candidate


def x_solve(model: FullOrderModel, rhs: np.ndarray) -> np.ndarray:
    """Apply ``X**-1`` through a cached factorization (Riesz lift of residual data)."""
    lu = model._cache.get("x_lu")
    if lu is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sp.SparseEfficiencyWarning)
            lu = splu(model.X.tocsc())
        model._cache["x_lu"] = lu
    return _lu_solve_real(lu, np.asarray(rhs))
