"""Dense complex linear-algebra kernel.

Hermitian eigendecompositions, pseudoinverse fractional powers, partial
traces, Kronecker products, norms, and tolerance-based PSD/support tests.
All functions are pure: they never mutate their inputs and hold no global
state. Matrices are plain complex ndarrays in row-major order; composite
spaces use the first-factor-slowest index convention throughout, i.e. a
matrix on ``A (x) B`` has row index ``a * dim_B + b``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import NotHermitian, NotPSD, NotSquare, ShapeMismatch

# Defaults calibrated to double-precision eigensolver accuracy with headroom.
RANK_TOL = 1e-10
PSD_TOL = 1e-9
HERM_TOL = 1e-9


def _as_square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {a.shape}")
    return a


def frob_norm(a: np.ndarray) -> float:
    """Frobenius norm: sqrt of the sum of squared entry magnitudes."""
    return float(np.linalg.norm(np.asarray(a)))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with first-factor-slowest ordering (a then b)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def eigh(a: np.ndarray, herm_tol: float = HERM_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    a : ndarray
        Square matrix with Hermiticity residual
        ``||a - a^dag||_F <= herm_tol * max(1, ||a||_F)``.
    herm_tol : float
        Relative Hermiticity tolerance.

    Returns
    -------
    (eigenvalues, eigenvectors)
        Eigenvalues sorted in descending order; column ``k`` of the unitary
        eigenvector matrix corresponds to ``eigenvalues[k]``.

    Raises
    ------
    NotSquare, NotHermitian
    """
    a = _as_square(a)
    residual = float(np.linalg.norm(a - a.conj().T))
    if residual > herm_tol * max(1.0, float(np.linalg.norm(a))):
        raise NotHermitian(f"Hermiticity residual {residual:.3e} exceeds tolerance")
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    return w[::-1].copy(), v[:, ::-1].copy()


def _psd_eigh(a: np.ndarray, psd_tol: float, herm_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """eigh plus a PSD gate: eigenvalues in ``[-psd_tol * ||a||_2, 0)`` are
    clipped to zero, anything lower raises NotPSD."""
    w, v = eigh(a, herm_tol=herm_tol)
    scale = max(float(np.abs(w).max()) if w.size else 0.0, 0.0)
    if w.size and w.min() < -psd_tol * max(scale, 1e-300):
        raise NotPSD(f"minimum eigenvalue {w.min():.3e} below -psd_tol * ||a||_2")
    return np.clip(w, 0.0, None), v


def hermitian_power(
    a: np.ndarray,
    q: float,
    rank_tol: float = RANK_TOL,
    psd_tol: float = PSD_TOL,
    herm_tol: float = HERM_TOL,
) -> np.ndarray:
    """Fractional matrix power of a Hermitian PSD matrix via the pseudoinverse.

    Eigenvalues above ``rank_tol * lambda_max`` are raised to the power ``q``;
    the rest are mapped to zero, so negative powers invert only on the
    support. ``a^q a^-q`` equals the support projector of ``a``.
    """
    w, v = _psd_eigh(a, psd_tol, herm_tol)
    lam_max = float(w.max()) if w.size else 0.0
    f = np.zeros_like(w)
    on_support = w > rank_tol * lam_max
    f[on_support] = w[on_support] ** q
    return (v * f) @ v.conj().T


def support_projector(
    a: np.ndarray,
    rank_tol: float = RANK_TOL,
    psd_tol: float = PSD_TOL,
) -> np.ndarray:
    """Orthogonal projector onto the span of eigenvectors with eigenvalue
    above ``rank_tol * lambda_max``."""
    w, v = _psd_eigh(a, psd_tol, HERM_TOL)
    lam_max = float(w.max()) if w.size else 0.0
    vr = v[:, w > rank_tol * lam_max]
    return vr @ vr.conj().T


def partial_trace(a: np.ndarray, dims: Sequence[int], traced_factor: int) -> np.ndarray:
    """Trace out one tensor factor of a square matrix.

    Parameters
    ----------
    a : ndarray
        Square matrix on the tensor product of the spaces in ``dims``.
    dims : sequence of int
        Subsystem dimensions, slowest factor first; their product must equal
        the matrix dimension.
    traced_factor : int
        Index into ``dims`` of the factor to contract.
    """
    a = np.asarray(a, dtype=complex)
    dims = tuple(int(d) for d in dims)
    if any(d <= 0 for d in dims):
        raise ShapeMismatch(f"factor dims must be positive, got {dims}")
    total = int(np.prod(dims))
    if a.ndim != 2 or a.shape != (total, total):
        raise ShapeMismatch(f"matrix shape {a.shape} does not match dims {dims}")
    if not 0 <= traced_factor < len(dims):
        raise ShapeMismatch(f"traced_factor {traced_factor} out of range for {dims}")
    m = len(dims)
    tensor = a.reshape(dims + dims)
    out = np.trace(tensor, axis1=traced_factor, axis2=m + traced_factor)
    kept = int(total // dims[traced_factor])
    return out.reshape(kept, kept)


def is_psd(a: np.ndarray, tol: float = PSD_TOL) -> tuple[bool, float]:
    """Tolerance-based PSD test.

    Returns ``(verdict, min_eigenvalue)`` where ``min_eigenvalue`` is the
    smallest eigenvalue of the Hermitian part ``(a + a^dag)/2``. The verdict
    is true iff the Hermiticity residual is within ``tol * max(1, ||a||_F)``
    and ``min_eigenvalue >= -tol * max(1, ||a||_2)``. Non-Hermitian input
    yields a false verdict, never an exception.
    """
    a = _as_square(a)
    herm_residual = float(np.linalg.norm(a - a.conj().T))
    w = np.linalg.eigvalsh((a + a.conj().T) / 2)
    min_eig = float(w[0]) if w.size else 0.0
    norm2 = float(np.linalg.norm(a, 2)) if a.size else 0.0
    verdict = herm_residual <= tol * max(1.0, float(np.linalg.norm(a))) and min_eig >= -tol * max(
        1.0, norm2
    )
    return bool(verdict), min_eig


def support_contained(
    rho: np.ndarray,
    sigma: np.ndarray,
    support_tol: float = PSD_TOL,
    rank_tol: float = RANK_TOL,
) -> bool:
    """Whether supp(rho) is contained in supp(sigma).

    Tested as ``||(I - P_sigma) P_rho||_2 <= support_tol`` on the support
    projectors of the two PSD operators.
    """
    p_rho = support_projector(rho, rank_tol=rank_tol)
    p_sigma = support_projector(sigma, rank_tol=rank_tol)
    leak = (np.eye(p_sigma.shape[0]) - p_sigma) @ p_rho
    return float(np.linalg.norm(leak, 2)) <= support_tol
