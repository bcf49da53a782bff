"""Breakdown of the class ensemble on a master equation that leaves the state space.

For gz = -0.5 the exact density matrix acquires a negative eigenvalue at
t = 0+. The ensemble halts at its first step under every transformation.
"""

import numpy as np

from rodeo.exact import evolve_exact, positivity_monitor, propagator_choi
from rodeo.model import basis_state, density, pauli_model
from rodeo.nmqj import NMQJConfig, run_nmqj
from rodeo.rateop import StateScaled, TargetBasis, Zero

me = pauli_model(0.0, 0.0, -0.5)
psi0 = basis_state("plus")
dt = 1e-3

for strategy in (Zero(), StateScaled(1.0), TargetBasis()):
    res = run_nmqj(me, strategy, psi0, NMQJConfig(dt=dt, t_max=0.1, n_members=1000))
    ev = res.breakdown
    print(f"{type(strategy).__name__:12s} breakdown at t={ev.time:g}, rate {ev.rate:.3f}, "
          f"missing target {np.round(ev.missing_target, 4)}")

mon = positivity_monitor(evolve_exact(me, density(psi0), 0.01, dt))
print("exact min eigenvalue:", [f"{t:.3f}:{m:.2e}" for t, m in zip(mon.times, mon.mu)][:6])
choi = propagator_choi(me, 0.5, dt, 100)
print("min Choi eigenvalue:", np.round(choi.min_eigenvalue, 4).tolist())
