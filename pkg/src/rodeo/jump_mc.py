"""Independent-trajectory jump engine for nonnegative rate-operator spectra.

Each trajectory follows the piecewise-deterministic process: per step of
length dt it jumps to eigenvector i of R_psi with probability lambda_i dt, and
otherwise takes the normalized first-order step with the non-linear effective
Hamiltonian K_psi. Trajectories are vectorized across a batch; every
trajectory owns one random stream derived from ``(seed, stream_id)``, so
results do not depend on batching or worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import GridMismatch, NegativeRate, NoConvergence, StepTooLarge
from .exact import DensityTrajectory, n_steps_for
from .linalg import inner, matvec, norm, outer
from .policy import current_policy
from .rateop import StateScaled, TargetBasis, Zero, build_rate_operator, self_jump_mask

CHUNK = 4096
_DRAW_BLOCK = 512


@dataclass(frozen=True)
class TrajectoryConfig:
    dt: float = 1e-3
    t_max: float = 1.0
    n_traj: int = 1000
    seed: int = 0
    max_event_prob: float = 0.1
    record_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")
        if not 0 < self.max_event_prob < 1:
            raise ValueError("max_event_prob must lie in (0, 1)")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def n_steps(self):
        return n_steps_for(self.t_max, self.dt)

    def record_steps(self):
        n = self.n_steps
        steps = list(range(0, n + 1, self.record_every))
        if steps[-1] != n:
            steps.append(n)
        return np.array(steps)


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    states: np.ndarray  # (n_times, d)
    jump_log: list = field(default_factory=list)  # (time, jump ordinal, eigenindex, rate)


@dataclass
class EnsembleResult:
    estimate: DensityTrajectory
    jump_log: np.ndarray  # structured: stream, step, index, rate
    n_traj: int

    @property
    def n_jumps(self):
        return len(self.jump_log)


JUMP_DTYPE = np.dtype([("stream", "i8"), ("step", "i8"), ("index", "i4"), ("rate", "f8")])


def stream_rng(seed, stream_id):
    """Random generator for one trajectory, independent of every other stream."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(stream_id),)))
    )


def deterministic_step(me, t, psi, strategy, dt, rate_op=None):
    """psi -> (1 - i K_psi dt) psi / ||(1 - i K_psi dt) psi||."""
    psi = np.asarray(psi, dtype=complex)
    if rate_op is None:
        rate_op = build_rate_operator(me, t, psi, strategy)
    k0 = me.hamiltonian_at(t) - 0.5j * me.decay_operator(t)
    # K_psi psi = K_0 psi - (i/2) Phi <psi|psi>
    k_psi = matvec(k0, psi) - 0.5j * rate_op.phi * np.real(inner(psi, psi))[..., None]
    out = psi - 1j * dt * k_psi
    return out / norm(out)[..., None]


def _event_rates(rate_op, psi, t, stream_ids=None):
    """Eigenvalues with self-jumps zeroed; raises on genuinely negative rates."""
    policy = current_policy()
    lam = np.array(rate_op.rates, dtype=float)
    lam[self_jump_mask(rate_op.spectral, psi)] = 0.0
    scale = np.maximum(1.0, np.abs(lam).max(axis=-1, keepdims=True))
    bad = lam < -policy.rate_tol * scale
    if bad.any():
        pos = np.argwhere(bad)[0]
        stream = None if stream_ids is None else int(stream_ids[pos[0]])
        raise NegativeRate(pos[-1], lam[tuple(pos)], time=t, stream_id=stream)
    return np.where(lam > 0, lam, 0.0)


def sample_event(spectral, dt, u, excluded=None, max_event_prob=None):
    """Index of the eigenvector to jump to, or None for no jump.

    ``excluded`` marks self-jump eigenvectors, which never fire.
    """
    policy = current_policy()
    max_p = policy.max_event_prob if max_event_prob is None else max_event_prob
    lam = np.array(spectral.eigenvalues if hasattr(spectral, "eigenvalues") else spectral, float)
    if excluded is not None:
        lam = np.where(excluded, 0.0, lam)
    neg = np.nonzero(lam < -policy.rate_tol * max(1.0, np.abs(lam).max(initial=0.0)))[0]
    if neg.size:
        raise NegativeRate(neg[0], lam[neg[0]])
    cum = np.cumsum(np.where(lam > 0, lam, 0.0) * dt)
    if cum[-1] > max_p:
        raise StepTooLarge(f"total jump probability {cum[-1]:.3g} exceeds {max_p}")
    hit = int(np.sum(cum <= u))
    return hit if hit < len(lam) else None


def _kernel_mode(strategy):
    if isinstance(strategy, Zero):
        return _kernels.MODE_ZERO, 0j, _NO_BASIS
    if isinstance(strategy, StateScaled):
        return _kernels.MODE_SCALED, complex(strategy.c), _NO_BASIS
    if isinstance(strategy, TargetBasis):
        return _kernels.MODE_BASIS, 0j, np.ascontiguousarray(strategy.vectors())
    return None


_NO_BASIS = np.zeros((2, 2), dtype=complex)


def _advance_compiled(me, mode, psi, t, dt, u, max_p, stream_ids):
    policy = current_policy()
    code, c, basis = mode
    k0 = np.ascontiguousarray(me.hamiltonian_at(t) - 0.5j * me.decay_operator(t))
    ops = np.ascontiguousarray(me.operators)
    rates = np.ascontiguousarray(me.rates_at(t), dtype=float)
    n = psi.shape[0]
    new = np.empty_like(psi)
    idx = np.empty(n, dtype=np.int64)
    rate = np.empty(n)
    status, row, index, value = _kernels.step_batch(
        psi, k0, ops, rates, dt, u, code, c, basis,
        policy.jacobi_rel_threshold, policy.jacobi_sweeps, policy.self_jump_fidelity,
        policy.rate_tol, max_p, new, idx, rate,
    )
    if status == _kernels.NEGATIVE_RATE:
        stream = None if stream_ids is None else int(stream_ids[row])
        raise NegativeRate(index, value, time=t, stream_id=stream)
    if status == _kernels.TOO_LARGE:
        raise StepTooLarge(
            f"total jump probability {value:.3g} exceeds {max_p} at t={t:.6g}; reduce dt"
        )
    if status == _kernels.NO_CONVERGENCE:
        raise NoConvergence(f"Jacobi did not converge at t={t:.6g}")
    return new, idx, rate


def _advance(me, strategy, psi, t, dt, u, max_p, stream_ids=None, compiled=True):
    """One step for a batch. Returns (new psi, jump index or -1, rate)."""
    mode = _kernel_mode(strategy) if compiled else None
    if mode is not None:
        return _advance_compiled(me, mode, np.ascontiguousarray(psi), t, dt, u, max_p, stream_ids)
    rate_op = build_rate_operator(me, t, psi, strategy)
    lam = _event_rates(rate_op, psi, t, stream_ids)
    cum = np.cumsum(lam * dt, axis=-1)
    total = cum[..., -1]
    if np.any(total > max_p):
        worst = float(total.max())
        raise StepTooLarge(
            f"total jump probability {worst:.3g} exceeds {max_p} at t={t:.6g}; reduce dt"
        )
    d = psi.shape[-1]
    idx = np.sum(cum <= u[:, None], axis=-1)
    jumped = idx < d
    new = deterministic_step(me, t, psi, strategy, dt, rate_op)
    if jumped.any():
        rows = np.nonzero(jumped)[0]
        new[rows] = rate_op.targets[rows, idx[rows]]
    rate = np.where(jumped, lam[np.arange(len(idx)), np.minimum(idx, d - 1)], 0.0)
    return new, np.where(jumped, idx, -1), rate


def _run_chunk(me, strategy, psi0, cfg, stream_ids, keep_states=False):
    n = cfg.n_steps
    rec_steps = cfg.record_steps()
    rec_pos = {int(s): k for k, s in enumerate(rec_steps)}
    d = me.dim
    b = len(stream_ids)
    gens = [stream_rng(cfg.seed, s) for s in stream_ids]
    psi = np.broadcast_to(np.asarray(psi0, dtype=complex), (b, d)).copy()
    psi = psi / norm(psi)[:, None]

    n_rec = len(rec_steps)
    sum_p = np.zeros((n_rec, d, d), dtype=complex)
    sq_re = np.zeros((n_rec, d, d))
    sq_im = np.zeros((n_rec, d, d))
    states = np.zeros((n_rec, b, d), dtype=complex) if keep_states else None
    log = []

    def record(k):
        p = outer(psi, psi)
        sum_p[k] = p.sum(axis=0)
        sq_re[k] = (p.real**2).sum(axis=0)
        sq_im[k] = (p.imag**2).sum(axis=0)
        if keep_states:
            states[k] = psi

    record(0)
    u_block = None
    for step in range(n):
        off = step % _DRAW_BLOCK
        if off == 0:
            width = min(_DRAW_BLOCK, n - step)
            u_block = np.stack([g.random(width) for g in gens])
        t = step * cfg.dt
        psi, idx, rate = _advance(
            me, strategy, psi, t, cfg.dt, u_block[:, off], cfg.max_event_prob, stream_ids
        )
        for r in np.nonzero(idx >= 0)[0]:
            log.append((stream_ids[r], step, idx[r], rate[r]))
        k = rec_pos.get(step + 1)
        if k is not None:
            record(k)
    return sum_p, sq_re, sq_im, np.array(log, dtype=JUMP_DTYPE), states


def _stderr(sum_p, sq_re, sq_im, n):
    mean = sum_p / n
    if n < 2:
        return mean, np.zeros_like(mean)
    var_re = np.maximum(sq_re - n * mean.real**2, 0.0) / (n - 1)
    var_im = np.maximum(sq_im - n * mean.imag**2, 0.0) / (n - 1)
    return mean, (np.sqrt(var_re) + 1j * np.sqrt(var_im)) / np.sqrt(n)


def run_trajectory(me, strategy, psi0, config, stream_id=0):
    """Single trajectory; identical to stream ``stream_id`` of an ensemble run."""
    _, _, _, log, states = _run_chunk(
        me, strategy, psi0, config, np.array([stream_id]), keep_states=True
    )
    steps = config.record_steps()
    jumps = [(e["step"] * config.dt, k, int(e["index"]), float(e["rate"])) for k, e in enumerate(log)]
    return TrajectoryRecord(steps * config.dt, states[:, 0, :], jumps)


def run_ensemble(me, strategy, psi0, config, threads=1):
    """Run ``config.n_traj`` trajectories and average their projectors.

    Work is split into fixed chunks of stream ids; chunk results are reduced
    in chunk order, so the output is bit-identical for any ``threads``.
    """
    ids = np.arange(config.n_traj)
    chunks = [ids[i : i + CHUNK] for i in range(0, len(ids), CHUNK)]

    def work(chunk):
        try:
            return _run_chunk(me, strategy, psi0, config, chunk)
        except NegativeRate as exc:
            return exc

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(c) for c in chunks]

    failures = [r for r in results if isinstance(r, NegativeRate)]
    if failures:
        raise min(failures, key=lambda e: (e.time, e.stream_id))

    d = me.dim
    n_rec = len(config.record_steps())
    sum_p = np.zeros((n_rec, d, d), dtype=complex)
    sq_re = np.zeros((n_rec, d, d))
    sq_im = np.zeros((n_rec, d, d))
    logs = []
    for s, r, i, log, _ in results:
        sum_p += s
        sq_re += r
        sq_im += i
        logs.append(log)
    mean, err = _stderr(sum_p, sq_re, sq_im, config.n_traj)
    times = config.record_steps() * config.dt
    return EnsembleResult(
        DensityTrajectory(times, mean, err), np.concatenate(logs), config.n_traj
    )


def ensemble_average(records, t_grid=None):
    """Mean projector over trajectory records, with per-entry standard errors."""
    if len(records) < 2:
        raise ValueError("need at least two records")
    times = records[0].times
    for r in records[1:]:
        if len(r.times) != len(times) or not np.allclose(r.times, times, rtol=0, atol=1e-12):
            raise GridMismatch("records are on different time grids")
    if t_grid is None:
        sel = np.arange(len(times))
    else:
        sel = np.searchsorted(times, t_grid)
        sel = np.clip(sel, 0, len(times) - 1)
        if not np.allclose(times[sel], t_grid, rtol=0, atol=1e-9):
            raise GridMismatch("requested grid is not a subset of the record grid")
    psi = np.stack([r.states[sel] for r in records])  # (n, t, d)
    p = outer(psi, psi)
    n = len(records)
    mean, err = _stderr(
        p.sum(axis=0), (p.real**2).sum(axis=0), (p.imag**2).sum(axis=0), n
    )
    return DensityTrajectory(times[sel], mean, err)
