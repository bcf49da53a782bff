"""Step-size studies: RK4 order on dephasing and the O(dt) bias of the jump engine."""

import numpy as np

from rodeo.exact import evolve_exact
from rodeo.jump_mc import TrajectoryConfig, run_ensemble
from rodeo.model import basis_state, density, pauli_model
from rodeo.observables import bloch, bloch_series
from rodeo.rateop import Zero

me = pauli_model(0.0, 0.0, 1.0)
psi0 = basis_state("plus")
exact = np.exp(-2.0)

print("RK4")
prev = None
for dt in (2e-2, 1e-2, 5e-3, 2.5e-3, 1.25e-3):
    err = abs(bloch(evolve_exact(me, density(psi0), 1.0, dt).states[-1])[0] - exact)
    order = "" if prev is None else f"order {np.log2(prev / err):.3f}"
    print(f"  dt={dt:<8g} error {err:.3e} {order}")
    prev = err

print("jump engine, N = 20000")
for dt in (1e-2, 5e-3, 1e-3):
    cfg = TrajectoryConfig(dt=dt, t_max=1.0, n_traj=20_000, seed=1, record_every=int(round(1 / dt)))
    est = bloch_series(run_ensemble(me, Zero(), psi0, cfg).estimate)
    print(f"  dt={dt:<8g} x(1) = {est.x[-1]:.4f} +- {est.stderr_x[-1]:.4f} (exact {exact:.4f})")
