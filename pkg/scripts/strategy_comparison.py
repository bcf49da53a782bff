"""Ensemble averages do not depend on the transformation, only the trajectories do."""

import numpy as np

from rodeo.exact import evolve_exact
from rodeo.jump_mc import TrajectoryConfig, run_ensemble
from rodeo.model import basis_state, density, pauli_model
from rodeo.observables import bloch_series, compare
from rodeo.rateop import StateScaled, TargetBasis, Zero

me = pauli_model(1.0, 0.5, 0.2, beta=1.0)
psi0 = basis_state("plus")
cfg = TrajectoryConfig(dt=1e-3, t_max=2.0, n_traj=5000, seed=0, record_every=20)
ref = bloch_series(evolve_exact(me, density(psi0), 2.0, 1e-3, 20))

for strategy in (Zero(), StateScaled(1.0), StateScaled(-0.5j), TargetBasis()):
    res = run_ensemble(me, strategy, psi0, cfg)
    rep = compare(bloch_series(res.estimate), ref, n_sigma=5, floor=0.02)
    jumps = res.n_jumps / cfg.n_traj
    dev = {k: round(v, 4) for k, v in rep.max_deviation.items()}
    print(f"{strategy!s:40s} jumps/traj {jumps:6.2f}  max dev {dev}  pass {rep.passed}")
