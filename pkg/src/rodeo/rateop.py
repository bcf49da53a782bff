"""Generalized rate operator, effective Hamiltonians and transformation strategies.

For a trajectory state psi the rate operator is

    R_psi = sum_a g_a L_a |psi><psi| L_a^dag + (|psi><Phi| + |Phi><psi|) / 2

where the free vector ``Phi = Phi(psi, t)`` is supplied by a strategy. Its
eigenvectors are the jump targets and its eigenvalues the jump rates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, DimensionUnsupported, NonFiniteStrategyOutput
from .linalg import (
    SpectralDecomposition,
    fidelity,
    hermitian_eig,
    inner,
    matvec,
    outer,
    trace,
)
from .policy import current_policy


@dataclass(frozen=True)
class Zero:
    """Phi = 0: the plain jump operator as rate operator."""

    def phi(self, me, t, psi, jump):
        return np.zeros_like(psi)


@dataclass(frozen=True)
class StateScaled:
    """Phi = c psi."""

    c: complex = 1.0

    def phi(self, me, t, psi, jump):
        return self.c * psi


@dataclass(frozen=True)
class TargetBasis:
    """Choose Phi so that R_psi is diagonal in a fixed qubit basis {e0, e1}.

    Jump targets are then always basis vectors.
    """

    basis: tuple = ((1.0, 0.0), (0.0, 1.0))

    def vectors(self):
        return np.array(self.basis, dtype=complex)

    def phi(self, me, t, psi, jump):
        return _target_basis_phi(psi, jump, self.vectors())


@dataclass(frozen=True)
class Custom:
    """User callback ``fn(psi, t) -> Phi`` evaluated one state at a time."""

    fn: Callable

    def phi(self, me, t, psi, jump):
        psi = np.asarray(psi)
        flat = psi.reshape(-1, psi.shape[-1])
        out = np.array([np.asarray(self.fn(p, t), dtype=complex) for p in flat])
        if out.shape != flat.shape:
            raise DimensionMismatch(
                f"custom strategy returned shape {out.shape[1:]}, expected {flat.shape[1:]}"
            )
        return out.reshape(psi.shape)


@dataclass(frozen=True)
class RateOperator:
    matrix: np.ndarray
    spectral: SpectralDecomposition
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    phi: np.ndarray

    @property
    def rates(self):
        return self.spectral.eigenvalues

    @property
    def targets(self):
        return self.spectral.eigenvectors


def _jump_images(me, t, psi):
    """(rates, L_a psi) with the images stacked on axis -2."""
    rates = me.rates_at(t)
    ops = me.operators
    if len(ops) == 0:
        return rates, np.zeros(psi.shape[:-1] + (0, me.dim), dtype=complex)
    images = np.stack([matvec(op, psi) for op in ops], axis=-2)
    return rates, images


def jump_on_state(me, t, psi):
    """sum_a g_a L_a |psi><psi| L_a^dag."""
    rates, images = _jump_images(me, t, psi)
    out = np.zeros(psi.shape[:-1] + (me.dim, me.dim), dtype=complex)
    for a, rate in enumerate(rates):
        out = out + rate * outer(images[..., a, :], images[..., a, :])
    return out


def _target_basis_phi(psi, jump, basis):
    d = psi.shape[-1]
    if d != 2 or basis.shape != (2, 2):
        raise DimensionUnsupported("target-basis transformation is defined for qubits only")
    e0, e1 = basis
    a = inner(e0, psi)
    b = inner(e1, psi)
    j = inner(e0, matvec(jump, np.broadcast_to(e1, psi.shape)))
    return (-2.0 * j * b)[..., None] * e0 + (-2.0 * np.conj(j) * a)[..., None] * e1


def target_basis_phi(me, t, psi, basis):
    """Minimal-norm Phi cancelling <e0|R_psi|e1> for a qubit."""
    if me.dim != 2:
        raise DimensionUnsupported("target-basis transformation is defined for qubits only")
    psi = np.asarray(psi, dtype=complex)
    return _target_basis_phi(psi, jump_on_state(me, t, psi), np.asarray(basis, dtype=complex))


def split_rates(eigenvalues):
    lam = np.asarray(eigenvalues, dtype=float)
    plus = np.where(lam > 0, lam, 0.0)
    minus = np.where(lam < 0, -lam, 0.0)
    return plus, minus


def _check_state(me, psi):
    if psi.shape[-1] != me.dim:
        raise DimensionMismatch(f"state has dimension {psi.shape[-1]}, model has {me.dim}")
    n = np.sqrt(np.real(inner(psi, psi)))
    if np.any(np.abs(n - 1.0) > current_policy().norm_tol):
        raise ValueError("trajectory state must be normalized")


def _spectral_in_basis(matrix, basis):
    # R is diagonal in the target basis by construction; read the spectrum off
    # directly rather than letting roundoff pick an eigenbasis when the two
    # diagonal entries are degenerate
    d = matrix.shape[-1]
    flat = np.ascontiguousarray(matrix.reshape(-1, d, d))
    vals, vecs = _kernels.basis_spectrum_batch(flat, np.ascontiguousarray(basis))
    return SpectralDecomposition(vals.reshape(matrix.shape[:-1]), vecs.reshape(matrix.shape))


def build_rate_operator(me, t, psi, strategy):
    psi = np.asarray(psi, dtype=complex)
    _check_state(me, psi)
    jump = jump_on_state(me, t, psi)
    phi = np.asarray(strategy.phi(me, t, psi, jump), dtype=complex)
    if phi.shape != psi.shape:
        raise DimensionMismatch(f"strategy returned shape {phi.shape}, expected {psi.shape}")
    if not np.all(np.isfinite(phi)):
        raise NonFiniteStrategyOutput("strategy produced non-finite Phi")
    matrix = jump + 0.5 * (outer(psi, phi) + outer(phi, psi))
    if isinstance(strategy, TargetBasis):
        spectral = _spectral_in_basis(matrix, strategy.vectors())
    else:
        spectral = hermitian_eig(matrix)
    plus, minus = split_rates(spectral.eigenvalues)
    return RateOperator(matrix, spectral, plus, minus, phi)


def effective_hamiltonian(me, t, psi, strategy, rate_op=None):
    """(K_psi, K~_psi) with K~ = K + (i/2) tr(R_psi) 1."""
    psi = np.asarray(psi, dtype=complex)
    if rate_op is None:
        rate_op = build_rate_operator(me, t, psi, strategy)
    k0 = me.hamiltonian_at(t) - 0.5j * me.decay_operator(t)
    k = k0 - 0.5j * outer(rate_op.phi, psi)
    tr_r = np.real(trace(rate_op.matrix))
    k_tilde = k + 0.5j * tr_r[..., None, None] * np.eye(me.dim)
    return k, k_tilde


def self_jump_mask(spectral, psi, tol=None):
    """True for eigenvectors that coincide with psi up to a phase."""
    tol = current_policy().self_jump_fidelity if tol is None else tol
    f = fidelity(spectral.eigenvectors, np.asarray(psi)[..., None, :])
    return f > 1.0 - tol


STRATEGIES = {"zero": Zero, "state_scaled": StateScaled, "target_basis": TargetBasis}
