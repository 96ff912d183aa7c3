"""Kraus and Choi representations of CP maps.

A channel maps a logical space L (dimension ``d``) into a physical space H
(dimension ``n``) and is stored as an ordered list of n x d Kraus operators;
the list length ``n_K`` is the environment dimension. Choi matrices for both
the channel (L -> H) and a recovery (H -> L) live on L (x) H with the logical
index slowest:

    channel  C[(mu,a),(nu,b)] = <a| E(|mu><nu|) |b>
    recovery C[(mu,a),(nu,b)] = <mu| R(|a><b|) |nu>

Channel equality is always decided on Choi matrices (Frobenius distance);
Kraus lists carry gauge freedom.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import linops
from .errors import (
    DimensionMismatch,
    NotPSD,
    NotTP,
    ShapeMismatch,
)

TP_TOL = 1e-8


# ----------------------------------------------------------------------
# Value types
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A CP (optionally trace-preserving) map given by Kraus operators.

    ``kraus`` is an ordered tuple of n x d complex matrices. Construction
    checks shape consistency only; trace preservation is a measured property
    (``tp_defect``), since trace-nonincreasing maps are first-class citizens
    here (the Petz map is trace nonincreasing off the support of E(sigma)).
    """

    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ops:
            raise ShapeMismatch("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2:
            raise ShapeMismatch("Kraus operators must be matrices")
        for k in ops:
            if k.shape != shape:
                raise ShapeMismatch(f"inconsistent Kraus shapes {k.shape} vs {shape}")
            if not np.all(np.isfinite(k)):
                raise ShapeMismatch("Kraus operators must be finite")
        object.__setattr__(self, "kraus", ops)

    @property
    def d(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def n(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def n_K(self) -> int:
        return len(self.kraus)

    @property
    def tp_defect(self) -> float:
        """Spectral norm of ``sum_k E_k^dag E_k - I``."""
        acc = sum(k.conj().T @ k for k in self.kraus)
        return float(np.linalg.norm(acc - np.eye(self.d), 2))

    def is_tp(self, tol: float = TP_TOL) -> bool:
        return self.tp_defect <= tol


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Trace-one PSD operator; normalization is enforced at construction."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        ok, min_eig = linops.is_psd(m, linops.PSD_TOL)
        if not ok:
            raise NotPSD(f"density operator is not PSD (min eig {min_eig:.3e})")
        tr = float(np.trace(m).real)
        if tr <= 0:
            raise NotPSD("density operator has nonpositive trace")
        object.__setattr__(self, "matrix", (m + m.conj().T) / (2 * tr))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def maximally_mixed(d: int) -> DensityOperator:
    return DensityOperator(np.eye(d))


def as_density(state) -> DensityOperator:
    """Coerce an ndarray (or pass through a DensityOperator)."""
    if isinstance(state, DensityOperator):
        return state
    return DensityOperator(np.asarray(state))


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """Choi matrix on L (x) H with a side tag (``"channel"`` or ``"recovery"``)."""

    matrix: np.ndarray
    d: int
    n: int
    side: str = "channel"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.d * self.n, self.d * self.n):
            raise ShapeMismatch(f"Choi shape {m.shape} does not match d={self.d}, n={self.n}")
        if self.side not in ("channel", "recovery"):
            raise ShapeMismatch(f"unknown Choi side tag {self.side!r}")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class ValidationReport:
    tp_defect: float
    is_tp: bool
    is_cp_trivially: bool = field(default=True)


# ----------------------------------------------------------------------
# Operations
# ----------------------------------------------------------------------


def validate(channel: KrausChannel, tol: float = TP_TOL) -> ValidationReport:
    """Report the trace-preservation defect; CP is automatic in Kraus form."""
    defect = channel.tp_defect
    return ValidationReport(tp_defect=defect, is_tp=defect <= tol)


def apply(channel: KrausChannel, state) -> np.ndarray:
    """Apply the channel: ``sum_k E_k rho E_k^dag``."""
    rho = state.matrix if isinstance(state, DensityOperator) else np.asarray(state, dtype=complex)
    if rho.shape != (channel.d, channel.d):
        raise DimensionMismatch(f"state dim {rho.shape} vs channel input dim {channel.d}")
    out = np.zeros((channel.n, channel.n), dtype=complex)
    for k in channel.kraus:
        out += k @ rho @ k.conj().T
    return out


def adjoint(channel: KrausChannel) -> KrausChannel:
    """Hilbert-Schmidt adjoint: Kraus list ``{E_k^dag}``."""
    return KrausChannel(tuple(k.conj().T for k in channel.kraus))


def compose(second: KrausChannel, first: KrausChannel) -> KrausChannel:
    """Composite map second o first, Kraus products in lexicographic order
    (second index outer, first index inner)."""
    if second.d != first.n:
        raise DimensionMismatch(
            f"cannot compose: second acts on dim {second.d}, first outputs dim {first.n}"
        )
    ops = tuple(r @ e for r in second.kraus for e in first.kraus)
    return KrausChannel(ops)


def choi(channel: KrausChannel, side: str = "channel") -> ChoiMatrix:
    """Choi matrix of a Kraus channel on L (x) H, logical index slowest.

    ``side="channel"`` treats the input space as logical (noise map L -> H);
    ``side="recovery"`` treats the output space as logical (recovery H -> L).
    """
    if side == "channel":
        d, n = channel.d, channel.n
        vecs = [k.T.reshape(-1) for k in channel.kraus]
    elif side == "recovery":
        d, n = channel.n, channel.d
        vecs = [k.reshape(-1) for k in channel.kraus]
    else:
        raise ShapeMismatch(f"unknown Choi side tag {side!r}")
    m = np.zeros((d * n, d * n), dtype=complex)
    for v in vecs:
        m += np.outer(v, v.conj())
    return ChoiMatrix(matrix=m, d=d, n=n, side=side)


def kraus_from_choi(c: ChoiMatrix, rank_tol: float = linops.RANK_TOL) -> KrausChannel:
    """Extract a Kraus representation from a Choi matrix by eigenfactorization.

    Eigenvalues below ``rank_tol * lambda_max`` are dropped. The round trip
    ``choi(kraus_from_choi(c))`` reproduces ``c`` up to that cut.
    """
    w, v = linops.eigh(c.matrix)
    lam_max = float(w.max()) if w.size else 0.0
    if w.size and w.min() < -linops.PSD_TOL * max(lam_max, 1e-300):
        raise NotPSD(f"Choi matrix has eigenvalue {w.min():.3e}")
    ops = []
    for lam, col in zip(w, v.T):
        if lam <= rank_tol * lam_max:
            continue
        block = np.sqrt(lam) * col.reshape(c.d, c.n)
        ops.append(block.T if c.side == "channel" else block)
    return KrausChannel(tuple(ops))


def channel_from_qec_matrix(
    m: np.ndarray,
    d: int,
    n_K: int,
    rank_tol: float = linops.RANK_TOL,
    tp_tol: float = TP_TOL,
) -> KrausChannel:
    """Reconstruct a channel whose identity-reference QEC matrix equals ``m``.

    ``m`` must be PSD on L (x) K with ``tr_K m = I_d``. The factorization
    ``m = A^dag A`` is taken from the eigendecomposition (stable for
    rank-deficient inputs such as Pauli-channel projectors); the physical
    dimension of the result is the numerical rank of ``m``.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (d * n_K, d * n_K):
        raise ShapeMismatch(f"QEC matrix shape {m.shape} does not match d={d}, n_K={n_K}")
    tr_k = linops.partial_trace(m, (d, n_K), 1)
    if float(np.linalg.norm(tr_k - np.eye(d), 2)) > tp_tol:
        raise NotTP("tr_K of the QEC matrix is not the identity on L")
    w, v = linops.eigh(m)
    lam_max = float(w.max()) if w.size else 0.0
    if w.size and w.min() < -linops.PSD_TOL * max(lam_max, 1e-300):
        raise NotPSD(f"QEC matrix has eigenvalue {w.min():.3e}")
    keep = w > rank_tol * lam_max
    a = (np.sqrt(w[keep])[:, None]) * v[:, keep].conj().T  # rank x (d * n_K)
    rank = a.shape[0]
    cols = a.reshape(rank, d, n_K)
    ops = tuple(np.ascontiguousarray(cols[:, :, k]) for k in range(n_K))
    return KrausChannel(ops)


# ----------------------------------------------------------------------
# JSON wire format
# ----------------------------------------------------------------------


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def _matrix_from_json(rows: Sequence) -> np.ndarray:
    try:
        arr = np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ShapeMismatch(f"malformed matrix entries: {exc}") from exc
    if arr.ndim != 2:
        raise ShapeMismatch("matrix JSON must be a list of rows of [re, im] pairs")
    return arr


def channel_to_json(channel: KrausChannel) -> dict:
    """Wire format: ``{"d", "n", "kraus": [matrix...]}``, entries ``[re, im]``."""
    return {
        "d": channel.d,
        "n": channel.n,
        "kraus": [_matrix_to_json(k) for k in channel.kraus],
    }


def channel_from_json(obj: dict) -> KrausChannel:
    try:
        d, n = int(obj["d"]), int(obj["n"])
        ops = [_matrix_from_json(k) for k in obj["kraus"]]
    except (KeyError, TypeError) as exc:
        raise ShapeMismatch(f"malformed channel JSON: {exc}") from exc
    channel = KrausChannel(tuple(ops))
    if channel.d != d or channel.n != n:
        raise ShapeMismatch(
            f"declared dims ({d}, {n}) do not match Kraus shapes ({channel.d}, {channel.n})"
        )
    return channel


def choi_to_json(c: ChoiMatrix) -> dict:
    return {"d": c.d, "n": c.n, "matrix": _matrix_to_json(c.matrix)}


def choi_from_json(obj: dict, side: str = "recovery") -> ChoiMatrix:
    try:
        return ChoiMatrix(
            matrix=_matrix_from_json(obj["matrix"]),
            d=int(obj["d"]),
            n=int(obj["n"]),
            side=side,
        )
    except (KeyError, TypeError) as exc:
        raise ShapeMismatch(f"malformed Choi JSON: {exc}") from exc
