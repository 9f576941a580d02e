"""Pencil spectrum in the analysis band, statics field, modal frequency expansion.

The direct solution separates into a statics part scaled by ``1/(i omega)``
and resonant terms, one per pencil eigenpair.  With eigenvectors stored at
unit energy norm the exact resonant coefficient at frequency ``omega`` is

    i * omega * A_n * (omega_n**2 + 1) / (omega_n**2 - omega**2),

where ``A_n`` is the coupling coefficient of mode ``n``.  The familiar
``1 / (1 - omega**2 / omega_n**2)`` gain law is this same expression written
in the curl-normalized basis; keeping the energy-normalized basis everywhere
makes the reduced-space algebra downstream orthonormal.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse.linalg import eigsh

from . import fom
from .errors import AtResonance, EigensolverFailure
from .fom import FrequencyBand, FullOrderModel, x_norm, x_solve

# Pencil eigenvalues below this (relative) threshold form the kernel of K.
KERNEL_TOL = 1e-10

# Band-boundary slack: eigenvalues this close (relative) to the squared band
# edges count as in-band.
BOUNDARY_RTOL = 1e-9

# Worst admissible relative residual of an accepted eigenpair.
EIG_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ModalDecomposition:
    """In-band resonant frequencies, X-orthonormal eigenmodes, optional statics field."""

    omegas: np.ndarray
    modes: np.ndarray
    f0: np.ndarray | None = None

    @property
    def count(self) -> int:
        return int(self.omegas.size)


@dataclass(frozen=True)
class CouplingCoefficients:
    """Excitation coupling ``A_n`` of each retained mode, aligned with the decomposition."""

    values: np.ndarray


def _eig_residuals(model: FullOrderModel, lam: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    if lam.size == 0:
        return np.zeros(0)
    R = model.K @ vecs - model.M @ vecs * lam
    scale = (1.0 + np.abs(lam)) * np.linalg.norm(vecs, axis=0)
    return np.linalg.norm(R, axis=0) / np.maximum(scale, 1e-300)


def _band_mask(lam: np.ndarray, band: FrequencyBand) -> np.ndarray:
    lo, hi = band.omega_min**2, band.omega_max**2
    return (lam >= lo * (1.0 - BOUNDARY_RTOL)) & (lam <= hi * (1.0 + BOUNDARY_RTOL))


def _inband_sparse(model: FullOrderModel, band: FrequencyBand) -> tuple[np.ndarray, np.ndarray]:
    # Shift-invert at the band center, growing k until eigenvalues bracket the
    # band on both sides (then every in-band eigenvalue has been found).
    lo, hi = band.omega_min**2, band.omega_max**2
    sigma = 0.5 * (lo + hi)
    k = 16
    while True:
        k = min(k, model.n - 1)
        try:
            lam, vecs = eigsh(model.K, k=k, M=model.M, sigma=sigma, which="LM")
        except RuntimeError as exc:
            raise EigensolverFailure(f"shift-invert failed at sigma={sigma!r}: {exc}") from exc
        order = np.argsort(lam)
        lam, vecs = lam[order], vecs[:, order]
        bracketed = (lam.min() < lo * (1.0 - BOUNDARY_RTOL)) and (
            lam.max() > hi * (1.0 + BOUNDARY_RTOL)
        )
        if bracketed or k >= model.n - 1:
            mask = _band_mask(lam, band)
            return lam[mask], vecs[:, mask] / np.sqrt(lam[mask] + 1.0)
        k = 2 * k


def compute_inband_modes(model: FullOrderModel, band: FrequencyBand | None = None) -> ModalDecomposition:
    """All pencil eigenpairs with ``omega_n`` inside the band, X-orthonormalized.

    Eigenvalues within relative ``1e-9`` of a squared band edge count as
    in-band.  Dense models are decomposed fully; larger ones are probed by
    shift-invert iteration targeting the squared band.  Raises
    :class:`EigensolverFailure` if any accepted pair has a relative residual
    above ``1e-10``.
    """
    band = band if band is not None else model.band
    if model.n <= fom.DENSE_EIG_LIMIT:
        lam, vecs = fom.pencil_eig(model)
        mask = _band_mask(lam, band)
        lam_in, modes = lam[mask], vecs[:, mask]
    else:
        lam_in, modes = _inband_sparse(model, band)
    res = _eig_residuals(model, lam_in, modes)
    if res.size and res.max() > EIG_RESIDUAL_TOL:
        worst = int(np.argmax(res))
        raise EigensolverFailure(
            f"eigenpair at omega={np.sqrt(lam_in[worst])!r} has relative residual {res[worst]:.3e}"
        )
    return ModalDecomposition(omegas=np.sqrt(lam_in), modes=modes, f0=None)


def _kernel_basis(model: FullOrderModel) -> np.ndarray:
    """X-orthonormal basis of ``ker(K)`` (columns); empty when K is definite."""
    if model.n <= fom.DENSE_EIG_LIMIT:
        lam, vecs = fom.pencil_eig(model)
        tol = KERNEL_TOL * max(1.0, float(lam.max()))
        return vecs[:, lam < tol]
    # Probe the bottom of the spectrum; kernels of practical imports are tiny.
    scale = max(abs(model.K).max(), 1.0)
    k = 4
    while True:
        k = min(k, model.n - 1)
        lam, vecs = eigsh(model.K, k=k, M=model.M, sigma=-1e-8 * scale, which="LM")
        order = np.argsort(lam)
        lam, vecs = lam[order], vecs[:, order]
        tol = KERNEL_TOL * scale
        if lam.max() > tol or k >= model.n - 1:
            mask = lam < tol
            return vecs[:, mask] / np.sqrt(np.maximum(lam[mask], 0.0) + 1.0)
        k = 2 * k


def compute_statics(model: FullOrderModel) -> np.ndarray:
    """Statics field F0: kernel solve when ``K`` is singular, Riesz lift of ``b`` otherwise.

    With a nontrivial kernel the restriction ``(Z^H M Z) y = Z^H b`` on a kernel
    basis ``Z`` gives ``F0 = Z y``, the exact ``1/(i omega)`` term of the direct
    solution.  For a definite ``K`` the energy Riesz representative ``X**-1 b``
    stands in as the statics direction.  The result is X-orthogonalized against
    the in-band modes whenever the overlap exceeds ``1e-12``.
    """
    Z = _kernel_basis(model)
    if Z.shape[1] > 0:
        G = Z.conj().T @ (model.M @ Z)
        y = np.linalg.solve(G, Z.conj().T @ model.b)
        f0 = Z @ y
    else:
        f0 = x_solve(model, model.b)
    norm0 = x_norm(model, f0)
    if norm0 <= 0.0:
        warnings.warn("statics field vanished: excitation has no static content")
        return np.zeros(model.n)
    decomp = compute_inband_modes(model)
    if decomp.count:
        overlap = np.abs(decomp.modes.conj().T @ (model.X @ f0)).max()
        if overlap > 1e-12 * norm0:
            for _ in range(2):
                f0 = f0 - decomp.modes @ (decomp.modes.conj().T @ (model.X @ f0))
    return f0


def modal_decomposition(model: FullOrderModel, band: FrequencyBand | None = None) -> ModalDecomposition:
    """In-band modes with the statics field attached."""
    decomp = compute_inband_modes(model, band)
    return replace(decomp, f0=compute_statics(model))


def coupling_coefficients(decomp: ModalDecomposition, model: FullOrderModel) -> CouplingCoefficients:
    """Coupling ``A_n = conj(e_n)^H b`` of each retained mode with the excitation."""
    if decomp.modes.shape[0] != model.n:
        raise ValueError("decomposition does not match the model dimension")
    return CouplingCoefficients(values=(decomp.modes.T @ model.b).astype(complex))


def modal_solve(model: FullOrderModel, omega: float, mode_budget: str = "all") -> np.ndarray:
    """Frequency response assembled from the modal expansion.

    ``mode_budget="all"`` keeps every pencil eigenpair (the kernel enters as
    the statics term) and reproduces the direct solve; ``"in-band"`` keeps the
    kernel term plus the in-band modes only, which is the truncation used for
    analysis.  Raises :class:`AtResonance` when ``omega`` coincides with a
    retained resonant frequency.
    """
    if omega <= 0.0:
        raise ValueError("omega must be positive")
    if mode_budget not in ("all", "in-band"):
        raise ValueError(f"unknown mode_budget {mode_budget!r}")
    lam, vecs = fom.pencil_eig(model)
    kernel_tol = KERNEL_TOL * max(1.0, float(lam.max()))
    kernel = lam < kernel_tol
    if mode_budget == "all":
        sel = ~kernel
    else:
        sel = _band_mask(lam, model.band) & ~kernel
    sq = omega**2
    gaps = lam[sel] - sq
    if gaps.size and np.abs(gaps).min() <= 1e-12 * max(sq, float(lam.max())):
        worst = np.sqrt(lam[sel][np.argmin(np.abs(gaps))])
        raise AtResonance(f"omega={omega!r} coincides with retained resonance {worst!r}")
    x = np.zeros(model.n, dtype=complex)
    if kernel.any():
        Z = vecs[:, kernel]
        G = Z.conj().T @ (model.M @ Z)
        y = np.linalg.solve(G, Z.conj().T @ model.b)
        x += (Z @ y) / (1j * omega)
    amps = vecs[:, sel].T @ model.b
    x += 1j * omega * (vecs[:, sel] @ (amps * (lam[sel] + 1.0) / gaps))
    return x
