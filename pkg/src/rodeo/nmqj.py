"""Ensemble-coupled jump engine with reverse jumps for negative rates.

The distribution over pure states is carried by a finite set of classes, each
a representative state with an integer member count. Per step:

1. every member of a class may take a direct jump toward an eigenvector of its
   rate operator with positive eigenvalue (probability ``lambda+ dt``);
2. members of a class that is the target of a negative-rate eigenvector of a
   source class may jump back to the source, with per-member probability
   ``(N_source / N_target) lambda- dt``;
3. every class representative takes the deterministic step.

A member takes at most one jump per step. A negative rate whose target carries
no members cannot be realized; the run halts with a :class:`BreakdownEvent`,
which signals that the master equation leaves the set of states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import Breakdown, ClassLimit, StepTooLarge
from .exact import DensityTrajectory, n_steps_for
from .jump_mc import _stderr, deterministic_step
from .linalg import fidelity, norm, outer
from .policy import current_policy
from .rateop import build_rate_operator, self_jump_mask

RETENTION_STEPS = 100


@dataclass
class EnsembleClass:
    id: int
    representative: np.ndarray
    count: int
    idle_steps: int = 0


@dataclass(frozen=True)
class BreakdownEvent:
    time: float
    source_class: int
    eigenindex: int
    rate: float
    missing_target: np.ndarray


@dataclass(frozen=True)
class NMQJConfig:
    dt: float = 1e-3
    t_max: float = 1.0
    n_members: int = 10_000
    seed: int = 0
    max_event_prob: float = 0.1
    record_every: int = 1
    retention: int = RETENTION_STEPS
    max_classes: int = 200

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_members < 100:
            raise ValueError("the ensemble needs at least 100 members")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class StepStats:
    direct: int = 0
    reverse: int = 0


@dataclass
class RateInfo:
    """Spectral data of one class at the current time."""

    rates: np.ndarray
    targets: np.ndarray
    is_self: np.ndarray
    phi: object = None


@dataclass
class NMQJResult:
    estimate: DensityTrajectory
    populations: list  # (t, class_id, weight)
    n_classes: np.ndarray
    reverse_jumps_cum: np.ndarray
    direct_jumps: int
    breakdown: BreakdownEvent | None = None
    final_classes: list = field(default_factory=list)

    @property
    def reverse_jumps(self):
        return int(self.reverse_jumps_cum[-1]) if len(self.reverse_jumps_cum) else 0


def _matches(u, v, tol):
    return fidelity(u, v) >= 1.0 - tol


def _find_class(state, classes, tol, populated_only=False):
    for c in classes:
        if populated_only and c.count == 0:
            continue
        if _matches(state, c.representative, tol):
            return c
    return None


def _rate_info(me, t, classes, strategy):
    reps = np.stack([c.representative for c in classes])
    rop = build_rate_operator(me, t, reps, strategy)
    mask = self_jump_mask(rop.spectral, reps)
    info = {}
    for k, c in enumerate(classes):
        info[c.id] = RateInfo(rop.rates[k], rop.targets[k], mask[k])
    return info, rop


def _negative_tol(rates):
    return current_policy().rate_tol * max(1.0, float(np.abs(rates).max(initial=0.0)))


def detect_breakdown(classes, t, rate_info, match_tol=None):
    """First negative rate (class id order) whose target matches no populated class."""
    tol = current_policy().match_tol if match_tol is None else match_tol
    for c in sorted(classes, key=lambda c: c.id):
        if c.count == 0 or c.id not in rate_info:
            continue
        info = rate_info[c.id]
        cut = _negative_tol(info.rates)
        for i, lam in enumerate(info.rates):
            if info.is_self[i] or lam >= -cut:
                continue
            if _find_class(info.targets[i], classes, tol, populated_only=True) is None:
                return BreakdownEvent(float(t), c.id, i, float(lam), info.targets[i].copy())
    return None


def step_ensemble(me, t, classes, strategy, dt, rng, stats=None, next_id=None,
                  max_event_prob=None, retention=RETENTION_STEPS):
    """Advance the class ensemble by one step; returns the new class list.

    ``next_id`` is a one-element list holding the next free class id; it is
    updated in place when classes are created.
    """
    policy = current_policy()
    max_p = policy.max_event_prob if max_event_prob is None else max_event_prob
    tol = policy.match_tol
    stats = StepStats() if stats is None else stats
    if next_id is None:
        next_id = [max(c.id for c in classes) + 1]
    classes = sorted(classes, key=lambda c: c.id)
    info, rop = _rate_info(me, t, classes, strategy)

    event = detect_breakdown(classes, t, info, tol)
    if event is not None:
        raise Breakdown(event)

    by_id = {c.id: c for c in classes}
    counts = {c.id: c.count for c in classes}

    # outgoing channels per class: (probability, kind, payload)
    channels = {c.id: [] for c in classes}
    for c in classes:
        if c.count == 0:
            continue
        ri = info[c.id]
        cut = _negative_tol(ri.rates)
        for i, lam in enumerate(ri.rates):
            if ri.is_self[i]:
                continue
            if lam > 0:
                channels[c.id].append((lam * dt, "direct", ri.targets[i]))
            elif lam < -cut:
                tgt = _find_class(ri.targets[i], classes, tol, populated_only=True)
                p = (c.count / tgt.count) * (-lam) * dt
                channels[tgt.id].append((p, "reverse", c.id))

    moves = []  # (from id, kind, payload, n)
    for c in classes:
        chans = channels[c.id]
        if not chans or c.count == 0:
            continue
        probs = np.array([p for p, _, _ in chans])
        total = probs.sum()
        if total > max_p:
            raise StepTooLarge(
                f"class {c.id} has total jump probability {total:.3g} > {max_p} "
                f"at t={t:.6g}; reduce dt"
            )
        drawn = rng.multinomial(c.count, np.append(probs, 1.0 - total))
        for (_, kind, payload), n in zip(chans, drawn[:-1]):
            if n:
                moves.append((c.id, kind, payload, int(n)))

    # deterministic drift of every existing representative
    reps = np.stack([c.representative for c in classes])
    stepped = deterministic_step(me, t, reps, strategy, dt, rop)

    new_classes = []
    for c, rep in zip(classes, stepped):
        new_classes.append(EnsembleClass(c.id, rep, counts[c.id], c.idle_steps))
    new_by_id = {c.id: c for c in new_classes}

    for src, kind, payload, n in moves:
        new_by_id[src].count -= n
        if kind == "reverse":
            new_by_id[payload].count += n
            stats.reverse += n
            continue
        stats.direct += n
        # match the jump target against the pre-step representatives
        home = _find_class(payload, classes, tol)
        if home is not None:
            new_by_id[home.id].count += n
            continue
        fresh = None
        for c in new_classes:
            if c.id not in by_id and _matches(payload, c.representative, tol):
                fresh = c
                break
        if fresh is None:
            fresh = EnsembleClass(next_id[0], payload.copy(), 0)
            next_id[0] += 1
            new_classes.append(fresh)
            new_by_id[fresh.id] = fresh
        fresh.count += n

    return _merge_and_purge(new_classes, tol, retention)


def _merge_and_purge(classes, tol, retention):
    classes = sorted(classes, key=lambda c: c.id)
    kept = []
    for c in classes:
        twin = _find_class(c.representative, kept, tol)
        if twin is not None:
            twin.count += c.count
            if twin.count:
                twin.idle_steps = 0
            continue
        kept.append(c)
    out = []
    for c in kept:
        if c.count > 0:
            c.idle_steps = 0
            out.append(c)
        else:
            c.idle_steps += 1
            if c.idle_steps <= retention:
                out.append(c)
    return out


def _moments(classes, n_total, d):
    sum_p = np.zeros((d, d), dtype=complex)
    sq_re = np.zeros((d, d))
    sq_im = np.zeros((d, d))
    for c in classes:
        if c.count == 0:
            continue
        p = outer(c.representative, c.representative)
        sum_p += c.count * p
        sq_re += c.count * p.real**2
        sq_im += c.count * p.imag**2
    return _stderr(sum_p, sq_re, sq_im, n_total)


def run_nmqj(me, strategy, psi0, config, on_step=None):
    """Evolve the class ensemble from ``psi0``; halts at the first breakdown.

    ``on_step(t, classes)`` is called with the ensemble at every time step.
    """
    n_steps = n_steps_for(config.t_max, config.dt)
    rng = np.random.default_rng(np.random.SeedSequence(int(config.seed)))
    psi0 = np.asarray(psi0, dtype=complex)
    psi0 = psi0 / norm(psi0)
    classes = [EnsembleClass(0, psi0, config.n_members)]
    next_id = [1]
    stats = StepStats()
    n = config.n_members
    d = me.dim

    times, means, errs, n_cls, rev_cum, pops = [], [], [], [], [], []

    def record(step):
        t = step * config.dt
        mean, err = _moments(classes, n, d)
        times.append(t)
        means.append(mean)
        errs.append(err)
        populated = [c for c in classes if c.count > 0]
        n_cls.append(len(populated))
        rev_cum.append(stats.reverse)
        for c in classes:
            pops.append((t, c.id, c.count / n))

    record(0)
    if on_step is not None:
        on_step(0.0, classes)
    breakdown = None
    for step in range(n_steps):
        t = step * config.dt
        try:
            classes = step_ensemble(
                me, t, classes, strategy, config.dt, rng, stats, next_id,
                config.max_event_prob, config.retention,
            )
        except Breakdown as exc:
            breakdown = exc.event
            break
        assert sum(c.count for c in classes) == n
        if len(classes) > config.max_classes:
            raise ClassLimit(
                f"{len(classes)} classes at t={t + config.dt:.6g}; this transformation "
                "spreads jump targets continuously, pick one with a discrete target set"
            )
        if on_step is not None:
            on_step(t + config.dt, classes)
        if (step + 1) % config.record_every == 0 or step + 1 == n_steps:
            record(step + 1)

    estimate = DensityTrajectory(np.array(times), np.array(means), np.array(errs))
    return NMQJResult(
        estimate,
        pops,
        np.array(n_cls),
        np.array(rev_cum),
        stats.direct,
        breakdown,
        classes,
    )
