import json

import numpy as np
import pytest

from petzopt import (
    ChoiMatrix,
    DensityOperator,
    DimensionMismatch,
    KrausChannel,
    NotTP,
    ShapeMismatch,
    adjoint,
    apply,
    channel_from_json,
    channel_from_qec_matrix,
    channel_to_json,
    choi,
    choi_from_json,
    choi_to_json,
    compose,
    kraus_from_choi,
    kron,
    maximally_mixed,
    partial_trace,
    pauli_channel,
    qec_matrix,
    random_channel,
    toy_channel,
    validate,
)
from conftest import random_density, random_psd


def _choi_dist(a, b):
    return np.linalg.norm(a.matrix - b.matrix)


def test_validate_unitary_and_scaled():
    u = np.array([[0, 1], [1, 0]], dtype=complex)
    report = validate(KrausChannel((u,)))
    assert report.tp_defect <= 1e-15 and report.is_tp and report.is_cp_trivially
    half = KrausChannel((u / 2,))
    assert abs(validate(half).tp_defect - 0.75) <= 1e-12
    assert not half.is_tp()


def test_kraus_shape_checks():
    with pytest.raises(ShapeMismatch):
        KrausChannel((np.eye(2), np.zeros((3, 2))))
    with pytest.raises(ShapeMismatch):
        KrausChannel(())


def test_apply_identity_and_depolarizing():
    rng = np.random.default_rng(0)
    rho = random_density(rng, 2)
    ident = KrausChannel((np.eye(2),))
    assert np.allclose(apply(ident, rho), rho.matrix)
    depol = pauli_channel(2, {(a, b): 0.25 for a in range(2) for b in range(2)}).channel
    assert np.allclose(apply(depol, rho), np.eye(2) / 2, atol=1e-12)


def test_apply_trace_preserving_random():
    rng = np.random.default_rng(1)
    ch = random_channel(3, 4, 2, seed=5)
    rho = random_density(rng, 3)
    out = apply(ch, rho)
    assert abs(np.trace(out).real - 1.0) <= 1e-12
    with pytest.raises(DimensionMismatch):
        apply(ch, random_density(rng, 2))


def test_adjoint_duality_oracle():
    rng = np.random.default_rng(2)
    ch = random_channel(2, 3, 2, seed=7)
    adj = adjoint(ch)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    e_b = sum(k @ b @ k.conj().T for k in ch.kraus)
    eadj_a = sum(k @ a @ k.conj().T for k in adj.kraus)
    lhs = np.trace(a.conj().T @ e_b)
    rhs = np.trace(eadj_a.conj().T @ b)
    assert abs(lhs - rhs) <= 1e-12
    # involution on representations
    assert all(
        np.allclose(x, y) for x, y in zip(adjoint(adj).kraus, ch.kraus)
    )


def test_choi_identity_and_depolarizing():
    ident = choi(KrausChannel((np.eye(2),)))
    want = np.zeros((4, 4))
    for mu in range(2):
        for nu in range(2):
            want[mu * 2 + mu, nu * 2 + nu] = 1.0
    assert np.allclose(ident.matrix, want)
    depol = pauli_channel(2, {(a, b): 0.25 for a in range(2) for b in range(2)}).channel
    assert np.allclose(choi(depol).matrix, np.eye(4) / 2, atol=1e-12)


def test_choi_trace_preservation_oracle():
    ch = random_channel(3, 5, 3, seed=11)
    c = choi(ch)
    assert np.allclose(partial_trace(c.matrix, (3, 5), 1), np.eye(3), atol=1e-12)


def test_kraus_from_choi_round_trip():
    # identity channel: single Kraus, up to phase
    back = kraus_from_choi(choi(KrausChannel((np.eye(2),))))
    assert back.n_K == 1
    assert np.allclose(np.abs(back.kraus[0]), np.eye(2))
    # mixed dephasing: two Kraus with the right weights
    p = 0.3
    deph = KrausChannel((np.sqrt(p) * np.eye(2), np.sqrt(1 - p) * np.diag([1.0, -1.0])))
    back = kraus_from_choi(choi(deph))
    weights = sorted(np.linalg.norm(k) ** 2 / 2 for k in back.kraus)
    assert np.allclose(weights, [p, 1 - p], atol=1e-12)
    # random channel round trip on the Choi representative
    ch = random_channel(3, 3, 4, seed=13)
    c = choi(ch)
    assert _choi_dist(choi(kraus_from_choi(c)), c) <= 1e-10


def test_kraus_from_choi_recovery_side():
    ch = random_channel(4, 2, 2, seed=17)  # 4 -> 2, i.e. recovery-shaped
    c = choi(ch, side="recovery")
    back = kraus_from_choi(c)
    assert back.kraus[0].shape == (2, 4)
    assert _choi_dist(choi(back, side="recovery"), c) <= 1e-10


def test_channel_from_qec_matrix_unitary_case():
    ch = channel_from_qec_matrix(np.eye(3), d=3, n_K=1)
    assert ch.n_K == 1 and ch.tp_defect <= 1e-12
    u = ch.kraus[0]
    assert np.allclose(u.conj().T @ u, np.eye(3), atol=1e-12)


def test_channel_from_qec_matrix_round_trip():
    rng = np.random.default_rng(3)
    d, n_K = 2, 3
    alpha = random_psd(rng, n_K)
    alpha /= np.trace(alpha).real
    m = kron(np.eye(d), alpha)
    ch = channel_from_qec_matrix(m, d, n_K)
    assert np.linalg.norm(qec_matrix(ch).matrix - m) <= 1e-10
    # non-TP input is rejected
    with pytest.raises(NotTP):
        channel_from_qec_matrix(2 * m, d, n_K)


def test_compose():
    u = np.array([[0, 1], [1, 0]], dtype=complex)
    ch = random_channel(2, 3, 2, seed=19)
    ident = KrausChannel((np.eye(3),))
    assert _choi_dist(choi(compose(ident, ch)), choi(ch)) <= 1e-12
    unitary = KrausChannel((u,))
    roundtrip = compose(KrausChannel((u.conj().T,)), unitary)
    assert _choi_dist(choi(roundtrip), choi(KrausChannel((np.eye(2),)))) <= 1e-12
    rng = np.random.default_rng(4)
    rho = random_density(rng, 2)
    rec = random_channel(3, 2, 2, seed=23)
    lhs = apply(compose(rec, ch), rho)
    rhs = apply(rec, apply(ch, rho))
    assert np.linalg.norm(lhs - rhs) <= 1e-12


def test_channel_json_round_trip():
    ch = random_channel(2, 3, 2, seed=29)
    blob = json.dumps(channel_to_json(ch))
    back = channel_from_json(json.loads(blob))
    assert _choi_dist(choi(back), choi(ch)) <= 1e-14
    c = choi(ch)
    c_back = choi_from_json(json.loads(json.dumps(choi_to_json(c))), side="channel")
    assert np.linalg.norm(c_back.matrix - c.matrix) <= 1e-14


def test_density_operator_normalizes():
    rho = DensityOperator(2 * np.eye(3))
    assert abs(np.trace(rho.matrix).real - 1.0) <= 1e-12
    assert maximally_mixed(4).dim == 4


def test_choi_matrix_validation():
    with pytest.raises(ShapeMismatch):
        ChoiMatrix(matrix=np.eye(5), d=2, n=2)
    with pytest.raises(ShapeMismatch):
        ChoiMatrix(matrix=np.eye(4), d=2, n=2, side="noise")
