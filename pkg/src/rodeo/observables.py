"""Observables and comparison of stochastic estimates against a reference."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionUnsupported, GridMismatch
from .linalg import IDENTITY2, PAULI_X, PAULI_Y, PAULI_Z, trace


@dataclass
class BlochSeries:
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    stderr_x: np.ndarray
    stderr_y: np.ndarray
    stderr_z: np.ndarray

    def components(self):
        return {"x": self.x, "y": self.y, "z": self.z}

    def errors(self):
        return {"x": self.stderr_x, "y": self.stderr_y, "z": self.stderr_z}


def expectation(rho, op):
    """tr(rho O) for stacked density matrices."""
    return trace(np.asarray(rho) @ np.asarray(op))


def bloch(rho):
    rho = np.asarray(rho)
    if rho.shape[-2:] != (2, 2):
        raise DimensionUnsupported("Bloch vectors are defined for qubits only")
    x = np.real(expectation(rho, PAULI_X))
    y = np.real(expectation(rho, PAULI_Y))
    z = np.real(expectation(rho, PAULI_Z))
    return x, y, z


def from_bloch(x, y, z):
    return 0.5 * (IDENTITY2 + x * PAULI_X + y * PAULI_Y + z * PAULI_Z)


def bloch_series(traj):
    x, y, z = bloch(traj.states)
    if traj.stderr is None:
        zero = np.zeros_like(x)
        ex = ey = ez = zero
    else:
        # x = 2 Re rho01, y = -2 Im rho01, z = 2 rho00 - 1
        ex = 2 * traj.stderr[:, 0, 1].real
        ey = 2 * traj.stderr[:, 0, 1].imag
        ez = 2 * traj.stderr[:, 0, 0].real
    return BlochSeries(np.asarray(traj.times), x, y, z, ex, ey, ez)


def _finite_or_none(v):
    return float(v) if np.isfinite(v) else None


@dataclass
class CompareReport:
    max_deviation: dict
    z_scores: dict  # per component, per time
    failures: dict  # component -> number of grid points outside the band
    passed: bool
    n_sigma: float
    floor: float

    def summary(self):
        return {
            "passed": self.passed,
            "n_sigma": self.n_sigma,
            "floor": self.floor,
            "max_deviation": {k: float(v) for k, v in self.max_deviation.items()},
            # None where a deviation meets a zero standard error
            "max_z": {k: _finite_or_none(np.max(v, initial=0.0)) for k, v in self.z_scores.items()},
            "failures": self.failures,
        }


def compare(a, b, n_sigma=5.0, floor=0.0, combine_errors=True):
    """Pointwise comparison of two Bloch series on a common grid.

    A point passes when ``|a - b| <= max(n_sigma * stderr, floor)``; the
    standard error is the quadrature sum of both series' errors (or ``a``'s
    alone when ``combine_errors`` is false).
    """
    if len(a.times) != len(b.times) or not np.allclose(a.times, b.times, rtol=0, atol=1e-9):
        raise GridMismatch("series are on different time grids")
    dev, zs, fails = {}, {}, {}
    ea, eb = a.errors(), b.errors()
    for k, va in a.components().items():
        vb = b.components()[k]
        diff = np.abs(va - vb)
        se = np.hypot(ea[k], eb[k]) if combine_errors else ea[k]
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(se > 0, diff / se, np.where(diff > 0, np.inf, 0.0))
        dev[k] = float(diff.max(initial=0.0))
        zs[k] = z
        fails[k] = int(np.sum(diff > np.maximum(n_sigma * se, floor)))
    passed = all(v == 0 for v in fails.values())
    return CompareReport(dev, zs, fails, passed, n_sigma, floor)
