"""Time-dependent master equations in Lindblad-like form (rates may be negative)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .linalg import PAULI_X, PAULI_Y, PAULI_Z, dagger, hermiticity_error, matmul, outer


@dataclass(frozen=True)
class CoefficientFn:
    """Scalar envelope c(t) for rates and Hamiltonian terms.

    Families and their parameters:

    - ``constant``: ``c``
    - ``sinusoid``: ``a * sin(omega * t + phase) + offset``
    - ``cosine``: ``a * cos(omega * t + phase) + offset``
    - ``tanh_ramp``: ``a * tanh(s * t)``
    - ``polynomial``: ``sum_k coeffs[k] * t**k``
    - ``piecewise_linear``: linear interpolation through ``samples`` (pairs
      ``(t, value)``), held constant outside the sampled range
    """

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown coefficient family {self.family!r}")
        missing = set(FAMILIES[self.family]) - set(self.params)
        if missing:
            raise ValueError(f"{self.family} needs parameters {sorted(missing)}")

    def __call__(self, t):
        p = self.params
        f = self.family
        if f == "constant":
            return float(p["c"])
        if f == "sinusoid":
            return p["a"] * np.sin(p["omega"] * t + p.get("phase", 0.0)) + p.get("offset", 0.0)
        if f == "cosine":
            return p["a"] * np.cos(p["omega"] * t + p.get("phase", 0.0)) + p.get("offset", 0.0)
        if f == "tanh_ramp":
            return p["a"] * np.tanh(p["s"] * t)
        if f == "polynomial":
            return float(np.polynomial.polynomial.polyval(t, p["coeffs"]))
        samples = np.asarray(p["samples"], dtype=float)
        return float(np.interp(t, samples[:, 0], samples[:, 1]))

    @classmethod
    def const(cls, c):
        return cls("constant", {"c": float(c)})

    @classmethod
    def coerce(cls, value):
        if isinstance(value, CoefficientFn):
            return value
        if isinstance(value, dict):
            value = dict(value)
            return cls(value.pop("family"), value)
        return cls.const(value)


FAMILIES = {
    "constant": ("c",),
    "sinusoid": ("a", "omega"),
    "cosine": ("a", "omega"),
    "tanh_ramp": ("a", "s"),
    "polynomial": ("coeffs",),
    "piecewise_linear": ("samples",),
}


@dataclass(frozen=True)
class Channel:
    rate: CoefficientFn
    operator: np.ndarray


@dataclass(frozen=True)
class MasterEquation:
    """Generator ``-i[H(t), .] + sum_a g_a(t) (L_a . L_a^dag - {L_a^dag L_a, .}/2)``.

    ``hamiltonian`` is a list of ``(CoefficientFn, H_k)`` with
    ``H(t) = sum_k c_k(t) H_k``.
    """

    dim: int
    hamiltonian: tuple = ()
    channels: tuple = ()

    def __post_init__(self):
        d = self.dim
        if d < 2:
            raise ValueError("dimension must be at least 2")
        for _, h in self.hamiltonian:
            if h.shape != (d, d):
                raise DimensionMismatch(f"Hamiltonian term has shape {h.shape}, expected {(d, d)}")
            if hermiticity_error(h) > 1e-12:
                raise ValueError("Hamiltonian terms must be Hermitian")
        for ch in self.channels:
            if ch.operator.shape != (d, d):
                raise DimensionMismatch(
                    f"jump operator has shape {ch.operator.shape}, expected {(d, d)}"
                )

    @classmethod
    def build(cls, dim, hamiltonian=(), channels=()):
        ham = tuple(
            (CoefficientFn.coerce(c), np.array(h, dtype=complex)) for c, h in hamiltonian
        )
        chans = tuple(
            Channel(CoefficientFn.coerce(r), np.array(op, dtype=complex)) for r, op in channels
        )
        return cls(dim, ham, chans)

    @property
    def operators(self):
        if not self.channels:
            return np.zeros((0, self.dim, self.dim), dtype=complex)
        return np.stack([ch.operator for ch in self.channels])

    def hamiltonian_at(self, t):
        h = np.zeros((self.dim, self.dim), dtype=complex)
        for coef, hk in self.hamiltonian:
            h = h + coef(t) * hk
        return h

    def rates_at(self, t):
        return np.array([ch.rate(t) for ch in self.channels], dtype=float)

    def decay_operator(self, t):
        """Gamma(t) = sum_a g_a(t) L_a^dag L_a."""
        g = np.zeros((self.dim, self.dim), dtype=complex)
        for rate, op in zip(self.rates_at(t), self.operators):
            g = g + rate * (dagger(op) @ op)
        return g


def _check_dim(me, rho):
    if rho.shape[-2:] != (me.dim, me.dim):
        raise DimensionMismatch(f"state has shape {rho.shape[-2:]}, model dimension is {me.dim}")


def jump_part(me, t, rho):
    """J_t[rho] = sum_a g_a L_a rho L_a^dag (batched over leading axes of rho)."""
    rho = np.asarray(rho, dtype=complex)
    _check_dim(me, rho)
    out = np.zeros_like(rho)
    for rate, op in zip(me.rates_at(t), me.operators):
        out = out + rate * matmul(matmul(op, rho), dagger(op))
    return out


def drift_hamiltonian(me, t):
    """K_t = H(t) - i Gamma(t) / 2."""
    return me.hamiltonian_at(t) - 0.5j * me.decay_operator(t)


def generator_apply(me, t, rho):
    rho = np.asarray(rho, dtype=complex)
    _check_dim(me, rho)
    k = drift_hamiltonian(me, t)
    return -1j * (matmul(k, rho) - matmul(rho, dagger(k))) + jump_part(me, t, rho)


def pauli_p_divisibility(gx, gy, gz):
    margins = (gx + gy, gy + gz, gx + gz)
    return all(m >= 0 for m in margins), margins


def _haar_bases(n, d, rng):
    z = (rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    q = q * (diag / np.abs(diag))[:, None, :]
    return np.swapaxes(q, -1, -2)  # rows are basis vectors


def _qubit_scan_bases(n_theta=65, n_phi=64):
    theta = np.linspace(0.0, np.pi, n_theta)
    phi = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    th, ph = (a.ravel() for a in np.meshgrid(theta, phi, indexing="ij"))
    e0 = np.stack([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)], axis=-1)
    e1 = np.stack([-np.exp(-1j * ph) * np.sin(th / 2), np.cos(th / 2) + 0j], axis=-1)
    return np.stack([e0, e1], axis=1)


def p_divisibility_sampled(me, t, n_samples, rng, tol=1e-12):
    """Sampled necessary check of sum_j g_j |<f_m|L_j|f_n>|^2 >= 0 for m != n.

    Uses ``n_samples`` Haar-random orthonormal bases, plus a dense
    Bloch-sphere scan of bases when ``dim == 2``. A ``True`` result is not a
    proof of P-divisibility.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if not me.channels:
        return True, 0.0
    bases = _haar_bases(n_samples, me.dim, rng)
    if me.dim == 2:
        bases = np.concatenate([bases, _qubit_scan_bases()])
    rates = me.rates_at(t)
    ops = me.operators
    # amp[b, j, m, n] = <f_m| L_j |f_n>
    amp = np.einsum("bmx,jxy,bny->bjmn", bases.conj(), ops, bases)
    vals = np.einsum("j,bjmn->bmn", rates, np.abs(amp) ** 2)
    off = ~np.eye(me.dim, dtype=bool)
    worst = float(vals[:, off].min())
    return worst >= -tol, worst


# ---------------------------------------------------------------- presets


def pauli_model(gx, gy, gz, beta=0.0):
    """-i beta [sigma_z, rho] + sum_a g_a (sigma_a rho sigma_a - rho)."""
    return MasterEquation.build(
        2,
        hamiltonian=[(beta, PAULI_Z)],
        channels=[(gx, PAULI_X), (gy, PAULI_Y), (gz, PAULI_Z)],
    )


def pauli_rates(me, t):
    """(g_x, g_y, g_z) of a model built by :func:`pauli_model`."""
    r = me.rates_at(t)
    return float(r[0]), float(r[1]), float(r[2])


DEMO_RATES = {
    "gx": 0.3,
    "gy": 0.3,
    "gz": {"family": "cosine", "a": 0.5, "omega": 2.0},
    "beta": {"family": "sinusoid", "a": 0.5, "omega": 1.0, "offset": 1.0},
}


def basis_state(name, dim=2):
    named = {
        "zero": [1, 0],
        "one": [0, 1],
        "plus": [1 / np.sqrt(2), 1 / np.sqrt(2)],
        "minus": [1 / np.sqrt(2), -1 / np.sqrt(2)],
        "plus_i": [1 / np.sqrt(2), 1j / np.sqrt(2)],
        "minus_i": [1 / np.sqrt(2), -1j / np.sqrt(2)],
    }
    if dim != 2:
        raise ValueError("named states are qubit states")
    return np.array(named[name], dtype=complex)


def density(psi):
    return outer(psi, psi)
