"""Parametrized channel generators paired with their closed-form expectations.

Each generator returns a :class:`ZooFixture` bundling a channel, the input
and reference states it is meant to be analyzed with, and a map of expected
quantities (values the rest of the package must reproduce). The families:

- qudit Pauli channels built from clock and shift matrices,
- classical-to-classical channels from a conditional distribution,
- a two-Kraus qubit-into-qutrit toy channel where the transpose channel is
  always optimal,
- direct-sum constructions where optimality holds even though the input and
  reference states do not commute,
- an analytically solvable single-qubit family with commuting, non-equal
  input and reference states,
- finite-energy square-lattice GKP states and the two-mode beam-splitter
  transduction channel between them,
- seeded Haar-random channels for property tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import expm

from . import linops
from .channels import DensityOperator, KrausChannel, channel_from_qec_matrix, maximally_mixed
from .errors import (
    BadDimensions,
    BadDistribution,
    CutoffTooSmall,
    DegenerateEncoding,
    InfeasibleParameters,
    SupportViolation,
)

DIST_TOL = 1e-9
GKP_TAIL_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class ZooFixture:
    name: str
    channel: KrausChannel
    rho: DensityOperator
    sigma: DensityOperator
    expected: dict = field(default_factory=dict)
    provenance: str = ""
    tol: float = 1e-8


# ----------------------------------------------------------------------
# Qudit Pauli channels
# ----------------------------------------------------------------------


def clock_shift(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Generalized Pauli generators: shift X |a> = |a+1 mod d> and clock
    Z |a> = exp(2 pi i a / d) |a>."""
    omega = np.exp(2j * np.pi / d)
    z = np.diag(omega ** np.arange(d))
    x = np.roll(np.eye(d), 1, axis=0).astype(complex)
    return x, z


def pauli_channel(d: int, probs: Mapping[tuple[int, int], float]) -> ZooFixture:
    """Pauli channel ``{sqrt(p_g) X^a Z^b}`` on one qudit.

    ``probs`` maps exponent pairs ``(a, b)`` to probabilities. For the
    uniform distribution on a set S the transpose channel equals the adjoint
    and the optimal channel fidelity is ``1/|S|``, even though the exact
    error-correction conditions fail for ``|S| > 1``.
    """
    if d < 2:
        raise BadDimensions(f"qudit dimension must be >= 2, got {d}")
    items = sorted(probs.items())
    p = np.array([v for _, v in items], dtype=float)
    if p.size == 0 or np.any(p < -DIST_TOL) or abs(p.sum() - 1.0) > DIST_TOL:
        raise BadDistribution("probabilities must be nonnegative and sum to 1")
    x, z = clock_shift(d)
    kraus = []
    for (a, b), pg in items:
        op = np.linalg.matrix_power(x, a % d) @ np.linalg.matrix_power(z, b % d)
        kraus.append(np.sqrt(max(pg, 0.0)) * op)
    channel = KrausChannel(tuple(kraus))

    expected: dict = {"m_projector_residual": 0.0}
    support = [g for g, pg in items if pg > DIST_TOL]
    uniform = len(support) > 0 and all(
        abs(pg - 1.0 / len(support)) <= DIST_TOL for _, pg in items if pg > DIST_TOL
    )
    if uniform:
        expected["f_tc"] = 1.0 / len(support)
        expected["f_opt"] = 1.0 / len(support)
        expected["petz_adjoint_choi_dist"] = 0.0
        if (0, 0) in support:
            expected["f_identity"] = 1.0 / len(support)
    mm = maximally_mixed(d)
    return ZooFixture(
        name="pauli",
        channel=channel,
        rho=mm,
        sigma=mm,
        expected=expected,
        provenance="qudit Pauli error ensemble; clock-and-shift construction",
    )


# ----------------------------------------------------------------------
# Classical-to-classical channels
# ----------------------------------------------------------------------


def c2c_channel(cond_prob: np.ndarray) -> ZooFixture:
    """Classical-to-classical channel from a |Y| x |X| column-stochastic
    matrix ``p(y|x)``; Kraus operators ``sqrt(p(y|x)) |y><x|``.

    The transpose channel is optimal (fidelity ``1/|X|``) when distinct
    inputs reach disjoint output symbols, and when the output is independent
    of the input.
    """
    p = np.asarray(cond_prob, dtype=float)
    if p.ndim != 2 or p.size == 0:
        raise BadDistribution("cond_prob must be a |Y| x |X| matrix")
    if np.any(p < -DIST_TOL) or np.any(np.abs(p.sum(axis=0) - 1.0) > DIST_TOL):
        raise BadDistribution("columns of p(y|x) must be distributions over y")
    n_y, n_x = p.shape
    kraus = []
    for xx in range(n_x):
        for yy in range(n_y):
            op = np.zeros((n_y, n_x), dtype=complex)
            op[yy, xx] = np.sqrt(max(p[yy, xx], 0.0))
            kraus.append(op)
    channel = KrausChannel(tuple(kraus))

    disjoint = all(np.count_nonzero(p[yy] > DIST_TOL) <= 1 for yy in range(n_y))
    constant = all(np.allclose(p[:, xx], p[:, 0], atol=DIST_TOL) for xx in range(n_x))
    expected: dict = {}
    if disjoint or constant:
        expected["f_tc"] = 1.0 / n_x
        expected["f_opt"] = 1.0 / n_x
    mm = maximally_mixed(n_x)
    return ZooFixture(
        name="c2c",
        channel=channel,
        rho=mm,
        sigma=mm,
        expected=expected,
        provenance="classical conditional distribution embedded as a quantum channel",
    )


# ----------------------------------------------------------------------
# Toy qubit-into-qutrit channel
# ----------------------------------------------------------------------


def toy_channel(a: float, b: float) -> ZooFixture:
    """Two-Kraus channel from a qubit into a qutrit for which the transpose
    channel is optimal at every parameter value, with channel fidelity
    ``(c^2 / 2)(a/sqrt(2) + b)^2`` where ``c = 1/sqrt(a^2 + b^2)``."""
    if a <= 0 or b <= 0:
        raise InfeasibleParameters("toy channel needs a > 0 and b > 0")
    c = 1.0 / np.sqrt(a * a + b * b)
    e1 = c * np.array([[a, 0.0], [0.0, b], [0.0, 0.0]], dtype=complex)
    e2 = c * np.array([[0.0, a], [0.0, 0.0], [b, 0.0]], dtype=complex)
    f = 0.5 * c * c * (a / np.sqrt(2.0) + b) ** 2
    mm = maximally_mixed(2)
    return ZooFixture(
        name="toy",
        channel=KrausChannel((e1, e2)),
        rho=mm,
        sigma=mm,
        expected={"f_tc": f, "f_opt": f, "commutator_pgm": 0.0},
        provenance="two-Kraus qubit-to-qutrit model with block-orthogonal error spaces",
    )


# ----------------------------------------------------------------------
# Direct-sum constructions
# ----------------------------------------------------------------------


def direct_sum_fixture(
    block_states: Sequence[tuple[np.ndarray, np.ndarray, np.ndarray]],
) -> ZooFixture:
    """Block channel with QEC matrix ``M = (+)_s I_{L_s} (x) alpha_s``.

    Each entry of ``block_states`` is ``(rho_s, sigma_s, alpha_s)``: the
    subnormalized input and reference blocks on L_s (traces summing to one
    across blocks) and a trace-one PSD factor on K_s. The Petz fidelity is
    ``sum_s (tr rho_s)^2`` and B stays PSD even when rho and sigma fail to
    commute, which is the point of the family.
    """
    if not block_states:
        raise BadDistribution("need at least one block")
    rho_blocks, sigma_blocks, alpha_blocks = [], [], []
    for rho_s, sigma_s, alpha_s in block_states:
        rho_blocks.append(np.asarray(rho_s, dtype=complex))
        sigma_blocks.append(np.asarray(sigma_s, dtype=complex))
        alpha_blocks.append(np.asarray(alpha_s, dtype=complex))
    tr_rho = sum(float(np.trace(r).real) for r in rho_blocks)
    tr_sigma = sum(float(np.trace(s).real) for s in sigma_blocks)
    if abs(tr_rho - 1.0) > DIST_TOL or abs(tr_sigma - 1.0) > DIST_TOL:
        raise BadDistribution("block traces of rho and sigma must each sum to 1")
    for alpha_s in alpha_blocks:
        if abs(float(np.trace(alpha_s).real) - 1.0) > DIST_TOL:
            raise BadDistribution("each alpha_s must have unit trace")
    for rho_s, sigma_s in zip(rho_blocks, sigma_blocks):
        if not linops.support_contained(rho_s, sigma_s):
            raise SupportViolation("supp(rho_s) must lie inside supp(sigma_s)")

    d = sum(r.shape[0] for r in rho_blocks)
    n_K = sum(a.shape[0] for a in alpha_blocks)
    m = np.zeros((d * n_K, d * n_K), dtype=complex)
    rho = np.zeros((d, d), dtype=complex)
    sigma = np.zeros((d, d), dtype=complex)
    off_l = off_k = 0
    for rho_s, sigma_s, alpha_s in zip(rho_blocks, sigma_blocks, alpha_blocks):
        dl, dk = rho_s.shape[0], alpha_s.shape[0]
        rho[off_l : off_l + dl, off_l : off_l + dl] = rho_s
        sigma[off_l : off_l + dl, off_l : off_l + dl] = sigma_s
        for mu in range(off_l, off_l + dl):
            start = mu * n_K + off_k
            m[start : start + dk, start : start + dk] = alpha_s
        off_l += dl
        off_k += dk

    channel = channel_from_qec_matrix(m, d, n_K)
    f = sum(float(np.trace(r).real) ** 2 for r in rho_blocks)
    return ZooFixture(
        name="direct-sum",
        channel=channel,
        rho=DensityOperator(rho),
        sigma=DensityOperator(sigma),
        expected={"f_petz": f, "f_opt": f},
        provenance="direct-sum QEC matrix; optimality beyond commuting rho and sigma",
    )


def direct_sum_example(seed: int | None = None) -> ZooFixture:
    """Canonical two-block instance with [rho, sigma] != 0.

    With no seed, fixed matrices are used; a seed draws random blocks with
    the same structure.
    """
    if seed is None:
        rho_1 = 0.6 * np.array([[0.7, 0.21 + 0.28j], [0.21 - 0.28j, 0.3]], dtype=complex)
        sigma_1 = 0.5 * np.array([[0.75, 0.10], [0.10, 0.25]], dtype=complex)
        alpha_1 = np.array([[0.8, 0.2j], [-0.2j, 0.2]], dtype=complex)
        rho_2 = np.array([[0.4]], dtype=complex)
        sigma_2 = np.array([[0.5]], dtype=complex)
        alpha_2 = np.array([[1.0]], dtype=complex)
        return direct_sum_fixture([(rho_1, sigma_1, alpha_1), (rho_2, sigma_2, alpha_2)])
    rng = np.random.default_rng(seed)

    def rand_state(k):
        g = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
        s = g @ g.conj().T
        return s / np.trace(s).real

    w = rng.dirichlet((2.0, 2.0))
    blocks = []
    for i, dl in enumerate((2, 2)):
        blocks.append((w[i] * rand_state(dl), w[i] * rand_state(dl), rand_state(dl)))
    return direct_sum_fixture(blocks)


# ----------------------------------------------------------------------
# Parametrized qubit family with commuting rho and sigma
# ----------------------------------------------------------------------


def qubit_example(
    a: float = float(np.sqrt(0.3)),
    t: float = 1.0,
    x: float = 0.25,
    y: float = 0.08,
) -> ZooFixture:
    """Single-qubit channel family where the Petz map with a non-maximally
    mixed reference is optimal although ``rho != sqrt(sigma)``.

    ``sqrt(sigma) = diag(a, b)`` and ``gamma = diag(s, t)`` are diagonal;
    the square root of the reference QEC matrix is parametrized by
    ``(u, z, y, x, v)`` on the mixed block and the free parameters are pinned
    by trace preservation plus the optimality constraint
    ``(z s + v t) s = (u s + x t) t``, which closes into a quadratic for u.
    """
    if not 0.0 < a < 1.0 or t <= 0.0:
        raise InfeasibleParameters("need 0 < a < 1 and t > 0")
    b = float(np.sqrt(1.0 - a * a))
    s = (1.0 - b * t) / a
    if s <= 0.0:
        raise InfeasibleParameters("derived s = (1 - b t)/a must be positive")
    disc = b * b - x * x - y * y
    if disc <= 0.0:
        raise InfeasibleParameters("need b^2 - x^2 - y^2 > 0 for a real v")
    v = float(np.sqrt(disc))
    alpha = t / s
    beta = x * alpha * alpha - v * alpha
    p2, p1, p0 = 1.0 + alpha * alpha, 2.0 * alpha * beta, beta * beta - a * a + y * y
    roots = np.roots([p2, p1, p0])
    u = z = None
    for cand in sorted(float(r.real) for r in roots if abs(r.imag) < 1e-12):
        z_cand = alpha * cand + beta
        if cand > 0.0 and x * z_cand - y * y > 0.0:
            u, z = cand, z_cand
            break
    if u is None:
        raise InfeasibleParameters("no positive feasible root for u")

    sqrt_ms = np.zeros((4, 4))
    sqrt_ms[0, 0] = u
    sqrt_ms[1, 1] = z
    sqrt_ms[1, 2] = sqrt_ms[2, 1] = y
    sqrt_ms[2, 2] = x
    sqrt_ms[3, 3] = v
    inv_sq_sigma = np.diag([1.0 / a, 1.0 / b])
    m = linops.kron(inv_sq_sigma, np.eye(2)) @ (sqrt_ms @ sqrt_ms) @ linops.kron(
        inv_sq_sigma, np.eye(2)
    )
    channel = channel_from_qec_matrix(m, 2, 2)
    sigma = DensityOperator(np.diag([a * a, b * b]))
    rho = DensityOperator(np.diag([a * s, b * t]))
    f = (u * s + x * t) ** 2 + (z * s + v * t) ** 2
    return ZooFixture(
        name="qubit-example",
        channel=channel,
        rho=rho,
        sigma=sigma,
        expected={"b": b, "s": s, "u": u, "z": z, "v": v, "f_petz": f, "f_opt": f},
        provenance="commuting rho/sigma family violating the pretty-good commutator",
        tol=1e-5,
    )


# ----------------------------------------------------------------------
# GKP states and the beam-splitter transduction channel
# ----------------------------------------------------------------------


def _hermite_functions(cutoff: int, q: np.ndarray) -> np.ndarray:
    """Oscillator eigenfunctions psi_0..psi_{cutoff-1} on the grid, by the
    stable three-term recurrence."""
    psi = np.zeros((cutoff, q.size))
    psi[0] = np.pi**-0.25 * np.exp(-q * q / 2.0)
    if cutoff > 1:
        psi[1] = np.sqrt(2.0) * q * psi[0]
    for n in range(1, cutoff - 1):
        psi[n + 1] = np.sqrt(2.0 / (n + 1)) * q * psi[n] - np.sqrt(n / (n + 1.0)) * psi[n - 1]
    return psi


def _gkp_project(mu: int, delta: float, cutoff: int) -> tuple[np.ndarray, float]:
    """Fock coefficients of the finite-energy GKP codeword plus the mass
    fraction left above the cutoff."""
    # comb truncated where the envelope drops below 1e-12
    s_max = int(np.ceil(np.sqrt(np.log(1e12) / (2.0 * np.pi)) / delta)) + 1
    ss = np.arange(-s_max, s_max + 1)
    centers = (2 * ss + mu) * np.sqrt(np.pi)
    weights = np.exp(-np.pi * delta * delta * (2 * ss + mu) ** 2 / 2.0)
    span = max(float(np.abs(centers).max()) + 8.0 * delta, np.sqrt(2.0 * cutoff + 1.0) + 5.0)
    h = min(delta / 10.0, 0.02)
    q = np.arange(-span, span + h, h)
    wave = np.zeros_like(q)
    for c, w in zip(centers, weights):
        wave += w * np.exp(-((q - c) ** 2) / (2.0 * delta * delta))
    coeffs = h * (_hermite_functions(cutoff, q) @ wave)
    norm_sq = h * float(np.sum(wave * wave))
    tail = 1.0 - float(np.sum(coeffs * coeffs)) / norm_sq
    return coeffs / np.linalg.norm(coeffs), tail


def gkp_tail(mu: int, delta: float, cutoff: int) -> float:
    """Fock mass fraction of the codeword lying above the cutoff."""
    return _gkp_project(mu, delta, cutoff)[1]


def gkp_state(mu: int, delta: float, cutoff: int, tail_tol: float = GKP_TAIL_TOL) -> np.ndarray:
    """Fock coefficients of the finite-energy square-lattice GKP codeword.

    The position wavefunction is a comb of width-``delta`` Gaussian peaks at
    ``(2 s + mu) sqrt(pi)`` under the Gaussian envelope
    ``exp(-pi delta^2 (2 s + mu)^2 / 2)`` (the position-indexed envelope,
    which is symmetric under q -> -q for both codewords). The wavefunction is
    sampled on a dense grid and projected onto the oscillator eigenfunctions;
    the result is renormalized within the cutoff.
    """
    if mu not in (0, 1):
        raise BadDimensions("mu must be 0 or 1")
    if not 0.0 < delta < 1.0:
        raise InfeasibleParameters("delta must lie in (0, 1)")
    coeffs, tail = _gkp_project(mu, delta, cutoff)
    if tail > tail_tol:
        raise CutoffTooSmall(
            f"tail mass {tail:.3e} above cutoff {cutoff} exceeds {tail_tol:.1e}"
        )
    return coeffs


def _beam_splitter_block(n_total: int, theta: float) -> np.ndarray:
    """exp(-theta (a1^dag a2 - a1 a2^dag)) restricted to the total-photon-
    number-``n_total`` block, in the basis |m, n_total - m>."""
    m = np.arange(n_total)
    k = np.zeros((n_total + 1, n_total + 1))
    off = np.sqrt((m + 1.0) * (n_total - m))
    k[m + 1, m] = off
    k[m, m + 1] = -off
    return expm(-theta * k)


def gkp_transduction(
    delta: float,
    eta: float,
    cutoff: int = 80,
    kraus_drop_tol: float = 1e-5,
    tail_tol: float = GKP_TAIL_TOL,
) -> ZooFixture:
    """Logical qubit channel of GKP-encoded beam-splitter transduction.

    Mode 1 carries the logical qubit in the (symmetrically orthonormalized)
    GKP codeword basis, mode 2 starts in the GKP zero codeword, the
    number-conserving two-mode unitary with ``gt = arcsin(sqrt(eta))`` acts
    block-by-block in total photon number, and mode 1 is traced out. Kraus
    operators with 2-norm at most ``kraus_drop_tol`` are dropped; the
    trace-preservation defect this leaves is recorded on the channel.
    """
    if not 0.0 < eta < 1.0:
        raise InfeasibleParameters("eta must lie in (0, 1)")
    v0 = gkp_state(0, delta, cutoff, tail_tol)
    v1 = gkp_state(1, delta, cutoff, tail_tol)
    overlap = float(v0 @ v1)
    gram = np.array([[1.0, overlap], [overlap, 1.0]])
    w, vec = np.linalg.eigh(gram)
    if w.min() <= 1e-12:
        raise DegenerateEncoding("GKP codewords are linearly dependent at this delta")
    enc = np.column_stack([v0, v1]) @ (vec @ np.diag(w**-0.5) @ vec.T)

    theta = float(np.arcsin(np.sqrt(eta)))
    n_max = 2 * (cutoff - 1)
    raw = np.zeros((n_max + 1, n_max + 1, 2))
    for n_total in range(n_max + 1):
        lo, hi = max(0, n_total - cutoff + 1), min(n_total, cutoff - 1)
        block_in = np.zeros((n_total + 1, 2))
        mm = np.arange(lo, hi + 1)
        for mu in range(2):
            block_in[mm, mu] = enc[mm, mu] * v0[n_total - mm]
        if np.linalg.norm(block_in) < 1e-16:
            continue
        block_out = _beam_splitter_block(n_total, theta) @ block_in
        for k in range(n_total + 1):
            raw[k, n_total - k, :] = block_out[k, :]

    norms = np.array([np.linalg.norm(raw[k], 2) for k in range(n_max + 1)])
    kept = raw[norms > kraus_drop_tol]
    if kept.size == 0:
        raise CutoffTooSmall("all Kraus operators fell below the drop tolerance")
    live_rows = np.max(np.abs(kept), axis=(0, 2)) > 1e-14
    kept = kept[:, live_rows, :]
    channel = KrausChannel(tuple(np.asarray(kept[i], dtype=complex) for i in range(kept.shape[0])))
    mm_state = maximally_mixed(2)
    return ZooFixture(
        name="gkp",
        channel=channel,
        rho=mm_state,
        sigma=mm_state,
        expected={},
        provenance="finite-energy square-lattice GKP transduction through a beam splitter",
    )


# ----------------------------------------------------------------------
# Random channels
# ----------------------------------------------------------------------


def random_channel(d: int, n: int, n_K: int, seed: int) -> KrausChannel:
    """Haar-style random exactly-TP channel: a random isometry from L into
    H (x) K sliced along the environment index. Deterministic per seed."""
    if d < 1 or n < 1 or n_K < 1:
        raise BadDimensions("dimensions must be positive")
    if n_K > n * d:
        raise BadDimensions(f"n_K={n_K} exceeds n*d={n * d}")
    if n * n_K < d:
        raise BadDimensions(f"n*n_K={n * n_K} < d={d}: no TP channel exists")
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n * n_K, d)) + 1j * rng.normal(size=(n * n_K, d))
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diagonal(r))[None, :]  # fix the QR phase gauge
    return KrausChannel(tuple(q[k * n : (k + 1) * n, :] for k in range(n_K)))


def random_fixture(d: int, n: int, n_K: int, seed: int) -> ZooFixture:
    mm = maximally_mixed(d)
    return ZooFixture(
        name="random",
        channel=random_channel(d, n, n_K, seed),
        rho=mm,
        sigma=mm,
        expected={},
        provenance="seeded Haar-random isometry channel",
    )
