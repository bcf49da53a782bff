"""Small dense complex linear algebra.

All routines accept a leading batch shape (``(..., d)`` vectors and
``(..., d, d)`` matrices). Products are written as explicit sums over the
contracted index with elementwise numpy operations, so a result never depends
on how many states are stacked in a batch. The trajectory engines rely on this
for reproducibility across worker counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NoConvergence, NotHermitian, ZeroVector
from .policy import current_policy

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def matmul(a, b):
    """Batched matrix product ``a @ b`` with a fixed summation order."""
    a = np.asarray(a)
    b = np.asarray(b)
    out = a[..., :, 0, None] * b[..., None, 0, :]
    for k in range(1, a.shape[-1]):
        out = out + a[..., :, k, None] * b[..., None, k, :]
    return out


def matvec(a, v):
    a = np.asarray(a)
    v = np.asarray(v)
    out = a[..., :, 0] * v[..., 0, None]
    for k in range(1, a.shape[-1]):
        out = out + a[..., :, k] * v[..., k, None]
    return out


def inner(u, v):
    """<u|v>, conjugating the first argument."""
    u = np.asarray(u)
    v = np.asarray(v)
    out = np.conj(u[..., 0]) * v[..., 0]
    for k in range(1, u.shape[-1]):
        out = out + np.conj(u[..., k]) * v[..., k]
    return out


def norm(v):
    return np.sqrt(np.real(inner(v, v)))


def outer(u, v):
    """|u><v|."""
    return np.asarray(u)[..., :, None] * np.conj(np.asarray(v))[..., None, :]


def projector(psi):
    """|psi><psi| (trace equals the squared norm)."""
    psi = np.asarray(psi, dtype=complex)
    if np.any(norm(psi) == 0):
        raise ZeroVector("cannot build a projector from a zero vector")
    return outer(psi, psi)


def fidelity(u, v):
    """|<u|v>|^2 for unit vectors."""
    return np.abs(inner(u, v)) ** 2


def trace(a):
    return np.trace(a, axis1=-2, axis2=-1)


def hermiticity_error(a):
    return np.max(np.abs(a - dagger(a)), initial=0.0)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of a Hermitian matrix.

    ``eigenvalues[..., i]`` is ascending in ``i``; ``eigenvectors[..., i, :]``
    is the unit eigenvector belonging to it.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        vecs = self.eigenvectors
        return np.sum(
            self.eigenvalues[..., :, None, None] * outer(vecs, vecs), axis=-3
        )


def hermitian_eig(a, tol=None):
    """Cyclic complex Jacobi eigensolver for small Hermitian matrices.

    Accepts a single ``(d, d)`` matrix or a stack ``(..., d, d)``. Pivots are
    visited in row-major order each sweep and a pivot is rotated only if its
    modulus exceeds ``1e-14 * ||A||_F``; nearly diagonal input therefore keeps
    the coordinate basis. Each eigenvector is rotated so that its first
    largest-magnitude entry is real and positive, and pairs are sorted by
    eigenvalue, ties broken lexicographically on the eigenvector.
    """
    policy = current_policy()
    tol = policy.herm_tol if tol is None else tol
    a = np.array(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    err = hermiticity_error(a)
    if err > tol:
        raise NotHermitian(f"matrix is not Hermitian: max |A - A^dag| = {err:.3e}")
    d = a.shape[-1]
    flat = np.ascontiguousarray(a.reshape(-1, d, d))
    vals, vecs, ok = _kernels.eig_batch(
        flat, policy.jacobi_rel_threshold, policy.jacobi_sweeps
    )
    if not ok.all():
        raise NoConvergence(f"Jacobi did not converge in {policy.jacobi_sweeps} sweeps")
    return SpectralDecomposition(
        vals.reshape(a.shape[:-1]), vecs.reshape(a.shape)
    )
