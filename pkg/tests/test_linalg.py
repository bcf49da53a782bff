import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rodeo.errors import NoConvergence, NotHermitian, ZeroVector
from rodeo.linalg import (
    PAULI_X,
    dagger,
    fidelity,
    hermitian_eig,
    inner,
    matmul,
    matvec,
    outer,
    projector,
    trace,
)

from conftest import random_hermitian, seeds


def test_identity_spectrum():
    s = hermitian_eig(np.eye(2, dtype=complex))
    np.testing.assert_allclose(s.eigenvalues, [1, 1])
    u = s.eigenvectors
    np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-12)


def test_pauli_x():
    s = hermitian_eig(PAULI_X)
    np.testing.assert_allclose(s.eigenvalues, [-1, 1], atol=1e-14)
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose(s.eigenvectors[0], [r, -r], atol=1e-14)
    np.testing.assert_allclose(s.eigenvectors[1], [r, r], atol=1e-14)


@pytest.mark.parametrize("d", [2, 3, 4, 8, 16])
def test_against_numpy(rng, d):
    a = random_hermitian(rng, d)
    s = hermitian_eig(a)
    np.testing.assert_allclose(s.eigenvalues, np.linalg.eigvalsh(a), atol=1e-10)
    np.testing.assert_allclose(s.reconstruct(), a, atol=1e-10)


@given(seeds, st.integers(2, 6))
def test_unitary_and_trace(seed, d):
    a = random_hermitian(np.random.default_rng(seed), d)
    s = hermitian_eig(a)
    u = s.eigenvectors
    assert np.abs(u.conj() @ u.T - np.eye(d)).max() <= 1e-10
    assert abs(np.trace(a).real - s.eigenvalues.sum()) <= 1e-10
    np.testing.assert_allclose(s.reconstruct(), a, atol=1e-10)
    # phase convention: largest component (first of them) is real and positive
    for v in u:
        k = np.argmax(np.abs(v) ** 2 > (np.abs(v) ** 2).max() * (1 - 1e-12))
        assert abs(v[k].imag) < 1e-12 and v[k].real > 0
    assert np.all(np.diff(s.eigenvalues) >= 0)


@given(seeds)
def test_pure_function(seed):
    a = random_hermitian(np.random.default_rng(seed), 4)
    s1, s2 = hermitian_eig(a.copy()), hermitian_eig(a.copy())
    assert s1.eigenvalues.tobytes() == s2.eigenvalues.tobytes()
    assert s1.eigenvectors.tobytes() == s2.eigenvectors.tobytes()


def test_batched_matches_single(rng):
    a = np.stack([random_hermitian(rng, 3) for _ in range(5)])
    batch = hermitian_eig(a)
    for k in range(5):
        one = hermitian_eig(a[k])
        assert one.eigenvalues.tobytes() == batch.eigenvalues[k].tobytes()


def test_degenerate_eigenspace(rng):
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    a = q @ np.diag([1.0, 1.0, 2.0, 2.0]) @ q.conj().T
    s = hermitian_eig(a)
    np.testing.assert_allclose(s.eigenvalues, [1, 1, 2, 2], atol=1e-12)
    np.testing.assert_allclose(s.reconstruct(), a, atol=1e-10)


def test_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eig(np.array([[0, 1], [0, 0]], dtype=complex))


def test_no_convergence(monkeypatch):
    import rodeo.linalg as la
    from rodeo.policy import NumericPolicy

    monkeypatch.setattr(la, "current_policy", lambda: NumericPolicy(jacobi_sweeps=0))
    with pytest.raises(NoConvergence):
        hermitian_eig(random_hermitian(np.random.default_rng(1), 3))


@pytest.mark.parametrize(
    "psi, expected",
    [
        ([1, 0], [[1, 0], [0, 0]]),
        ([1 / np.sqrt(2), 1 / np.sqrt(2)], [[0.5, 0.5], [0.5, 0.5]]),
        ([1 / np.sqrt(2), 1j / np.sqrt(2)], [[0.5, -0.5j], [0.5j, 0.5]]),
    ],
)
def test_projector(psi, expected):
    np.testing.assert_allclose(projector(np.array(psi, dtype=complex)), expected, atol=1e-15)


def test_projector_trace_is_squared_norm():
    np.testing.assert_allclose(projector(np.array([2.0, 0.0])), [[4, 0], [0, 0]])
    with pytest.raises(ZeroVector):
        projector(np.zeros(2))


@given(seeds)
def test_helpers_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(3, 4, 4)) + 1j * rng.normal(size=(3, 4, 4))
    b = rng.normal(size=(3, 4, 4)) + 1j * rng.normal(size=(3, 4, 4))
    u = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
    v = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
    for k in range(3):
        np.testing.assert_allclose(matmul(a, b)[k], a[k] @ b[k], atol=1e-12)
        np.testing.assert_allclose(matvec(a, u)[k], a[k] @ u[k], atol=1e-12)
        np.testing.assert_allclose(dagger(a)[k], a[k].conj().T)
        np.testing.assert_allclose(inner(u, v)[k], np.vdot(u[k], v[k]), atol=1e-12)
        np.testing.assert_allclose(outer(u, v)[k], np.outer(u[k], v[k].conj()), atol=1e-12)
        np.testing.assert_allclose(trace(a)[k], np.trace(a[k]), atol=1e-12)
    unit = u / np.linalg.norm(u, axis=-1, keepdims=True)
    np.testing.assert_allclose(fidelity(unit, 1j * unit), 1.0, atol=1e-12)
