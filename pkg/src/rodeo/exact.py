"""Reference density-matrix integrator and physicality monitors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StepTooLarge
from .linalg import dagger, hermitian_eig, trace
from .model import generator_apply
from .policy import current_policy


@dataclass
class DensityTrajectory:
    times: np.ndarray
    states: np.ndarray  # (n_times, d, d)
    stderr: np.ndarray | None = None  # per-entry standard errors for ensemble estimates


@dataclass
class PositivityMonitor:
    times: np.ndarray
    mu: np.ndarray
    xi: np.ndarray
    first_violation_time: float | None


@dataclass
class ChoiSpectrumSeries:
    times: np.ndarray
    eigenvalues: np.ndarray  # (n_times, d**2)

    @property
    def min_eigenvalue(self):
        return self.eigenvalues[:, 0]


def n_steps_for(t_max, dt):
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = int(round(t_max / dt))
    if n < 0 or abs(n * dt - t_max) > 1e-9 * max(1.0, t_max):
        raise ValueError(f"t_max={t_max} is not a whole number of steps dt={dt}")
    return n


def rk4_step(me, t, rho, dt):
    k1 = generator_apply(me, t, rho)
    k2 = generator_apply(me, t + dt / 2, rho + dt / 2 * k1)
    k3 = generator_apply(me, t + dt / 2, rho + dt / 2 * k2)
    k4 = generator_apply(me, t + dt, rho + dt * k3)
    return rho + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _propagate(me, rho0, t_max, dt, record_every, check_trace=True):
    """Integrate a stack of operators; returns (times, states[n_rec, ...])."""
    n = n_steps_for(t_max, dt)
    drift = current_policy().trace_drift
    rho = np.array(rho0, dtype=complex)
    tr0 = trace(rho)
    times = [0.0]
    states = [rho.copy()]
    for step in range(1, n + 1):
        rho = rk4_step(me, (step - 1) * dt, rho, dt)
        if check_trace:
            tr_err = np.max(np.abs(trace(rho) - tr0))
            herm_err = np.max(np.abs(rho - dagger(rho)))
            if tr_err > drift or herm_err > drift:
                raise StepTooLarge(
                    f"exact integrator drifted at t={step * dt:.6g} "
                    f"(trace {tr_err:.2e}, hermiticity {herm_err:.2e}); reduce dt"
                )
        if step % record_every == 0 or step == n:
            times.append(step * dt)
            states.append(rho.copy())
    return np.array(times), np.array(states)


def evolve_exact(me, rho0, t_max, dt, record_every=1):
    """Fixed-step classical RK4 for d rho / dt = L_t[rho]."""
    rho0 = np.asarray(rho0, dtype=complex)
    times, states = _propagate(me, rho0, t_max, dt, record_every)
    return DensityTrajectory(times, states)


def propagator_choi(me, t_max, dt, record_every=1):
    """Spectrum of C = (Lambda_t (x) id)|Omega><Omega| on the recording grid.

    The normalization ``|Omega> = sum_i |ii> / sqrt(d)`` gives spectrum
    ``{1, 0, ..., 0}`` at t = 0.
    """
    d = me.dim
    units = np.zeros((d, d, d, d), dtype=complex)  # units[i, j] = |i><j|
    for i in range(d):
        for j in range(d):
            units[i, j, i, j] = 1.0
    # off-diagonal units are traceless, so trace drift is checked on |i><i| only
    times, images = _propagate(me, units, t_max, dt, record_every, check_trace=False)
    # C[(a,i),(b,j)] = Lambda(|i><j|)[a, b] / d
    choi = np.einsum("tijab->taibj", images).reshape(len(times), d * d, d * d) / d
    spectral = hermitian_eig(choi, tol=1e-8)
    return ChoiSpectrumSeries(times, spectral.eigenvalues)


def positivity_monitor(traj):
    policy = current_policy()
    spectral = hermitian_eig(traj.states, tol=1e-8)
    mu = spectral.eigenvalues[:, 0]
    xi = spectral.eigenvectors[:, 0, :]
    bad = np.nonzero(mu < -policy.violation_mu)[0]
    first = float(traj.times[bad[0]]) if bad.size else None
    return PositivityMonitor(traj.times, mu, xi, first)
