import numpy as np
import pytest

from petzopt import (
    NotHermitian,
    NotPSD,
    NotSquare,
    ShapeMismatch,
    eigh,
    frob_norm,
    hermitian_power,
    is_psd,
    kron,
    partial_trace,
    support_contained,
    support_projector,
)
from conftest import random_hermitian, random_psd


def test_eigh_diagonal():
    w, v = eigh(np.diag([3.0, 1.0]))
    assert np.allclose(w, [3.0, 1.0])
    assert np.allclose(np.abs(v), np.eye(2))


def test_eigh_pauli_x():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    w, _ = eigh(x)
    assert np.allclose(w, [1.0, -1.0])


def test_eigh_reconstruction_random():
    rng = np.random.default_rng(0)
    for d in (6, 40, 200):
        a = random_hermitian(rng, d)
        w, v = eigh(a)
        assert np.all(np.diff(w) <= 1e-12)
        assert np.linalg.norm((v * w) @ v.conj().T - a) <= 1e-10 * np.linalg.norm(a)
        assert np.linalg.norm(v @ v.conj().T - np.eye(d)) <= 1e-10


def test_eigh_rejects_bad_input():
    with pytest.raises(NotSquare):
        eigh(np.zeros((2, 3)))
    with pytest.raises(NotHermitian):
        eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_hermitian_power_identity_and_kernel():
    assert np.allclose(hermitian_power(np.eye(2), -0.5), np.eye(2))
    assert np.allclose(hermitian_power(np.diag([4.0, 0.0]), -0.5), np.diag([0.5, 0.0]))


def test_hermitian_power_square_oracle():
    rng = np.random.default_rng(1)
    a = random_psd(rng, 4, rank=2)
    root = hermitian_power(a, 0.5)
    assert np.linalg.norm(root @ root - a) <= 1e-10 * np.linalg.norm(a)


def test_hermitian_power_group_property_on_support():
    rng = np.random.default_rng(2)
    a = random_psd(rng, 5, rank=3)
    p = support_projector(a)
    for q, r in [(0.5, 0.5), (-0.5, 1.0), (0.25, -0.25)]:
        lhs = hermitian_power(a, q) @ hermitian_power(a, r)
        rhs = p @ hermitian_power(a, q + r) @ p
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * max(1, np.linalg.norm(rhs))
    # negative power times positive power gives the support projector
    assert np.linalg.norm(hermitian_power(a, -0.5) @ hermitian_power(a, 0.5) - p) <= 1e-10


def test_hermitian_power_rejects_indefinite():
    with pytest.raises(NotPSD):
        hermitian_power(np.diag([1.0, -0.5]), 0.5)


def test_partial_trace_product_states():
    rng = np.random.default_rng(3)
    alpha = random_psd(rng, 3)
    alpha /= np.trace(alpha)
    assert np.allclose(partial_trace(kron(np.eye(2), alpha), (2, 3), 0), 2 * alpha)
    rho = random_psd(rng, 2)
    assert np.allclose(partial_trace(kron(rho, alpha), (2, 3), 1), rho)


def test_partial_trace_index_sum_oracle():
    rng = np.random.default_rng(4)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    got = partial_trace(a, (2, 3), 1)
    want = np.zeros((2, 2), dtype=complex)
    for mu in range(2):
        for nu in range(2):
            for k in range(3):
                want[mu, nu] += a[mu * 3 + k, nu * 3 + k]
    assert np.linalg.norm(got - want) <= 1e-14
    # trace preservation
    assert abs(np.trace(got) - np.trace(a)) <= 1e-12


def test_partial_trace_three_factor_order_commutes():
    rng = np.random.default_rng(5)
    dims = (2, 3, 2)
    a = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    first_then_last = partial_trace(partial_trace(a, dims, 0), (3, 2), 1)
    last_then_first = partial_trace(partial_trace(a, dims, 2), (2, 3), 0)
    assert np.linalg.norm(first_then_last - last_then_first) <= 1e-12


def test_partial_trace_shape_errors():
    with pytest.raises(ShapeMismatch):
        partial_trace(np.eye(5), (2, 3), 0)
    with pytest.raises(ShapeMismatch):
        partial_trace(np.eye(6), (2, 3), 2)


def test_kron_basics_and_round_trip():
    assert np.allclose(kron(np.eye(2), np.eye(3)), np.eye(6))
    assert np.allclose(
        kron(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])), np.diag([3.0, 4.0, 6.0, 8.0])
    )
    rng = np.random.default_rng(6)
    a = rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3))
    assert np.allclose(partial_trace(kron(a, b), (2, 3), 1), np.trace(b) * a)


def test_frob_norm():
    assert abs(frob_norm(np.eye(2)) - np.sqrt(2)) <= 1e-15
    assert frob_norm(np.zeros((3, 3))) == 0.0
    rng = np.random.default_rng(7)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert abs(frob_norm(a) ** 2 - np.trace(a.conj().T @ a).real) <= 1e-12


def test_is_psd():
    ok, lo = is_psd(np.eye(3), 1e-9)
    assert ok and abs(lo - 1.0) <= 1e-12
    ok, lo = is_psd(np.diag([1.0, -0.5]), 1e-9)
    assert not ok and abs(lo + 0.5) <= 1e-12
    # non-Hermitian input: false verdict, no exception
    ok, _ = is_psd(np.array([[1.0, 1.0], [0.0, 1.0]]), 1e-9)
    assert not ok


def test_support_projector():
    assert np.allclose(support_projector(np.diag([2.0, 0.0])), np.diag([1.0, 0.0]))
    rng = np.random.default_rng(8)
    full = random_psd(rng, 3)
    assert np.allclose(support_projector(full), np.eye(3))
    a = random_psd(rng, 5, rank=3)
    p = support_projector(a)
    assert abs(np.trace(p).real - 3) <= 1e-9
    assert np.linalg.norm(p @ p - p) <= 1e-10
    assert np.linalg.norm(p @ a - a) <= 1e-10


def test_support_contained():
    rng = np.random.default_rng(9)
    small = random_psd(rng, 4, rank=2)
    assert support_contained(small, small + random_psd(rng, 4, rank=2))
    disjoint = np.diag([0.0, 0.0, 0.0, 1.0])
    assert not support_contained(disjoint, np.diag([1.0, 1.0, 0.0, 0.0]))
