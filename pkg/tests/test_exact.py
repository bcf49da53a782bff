import numpy as np
import pytest
from hypothesis import given

from rodeo.errors import StepTooLarge
from rodeo.exact import evolve_exact, positivity_monitor, propagator_choi
from rodeo.model import MasterEquation, basis_state, density, pauli_model
from rodeo.observables import bloch

from conftest import random_density, seeds


def test_zero_generator():
    rho0 = random_density(np.random.default_rng(3))
    traj = evolve_exact(MasterEquation.build(2), rho0, 0.5, 0.01)
    np.testing.assert_array_equal(traj.states, np.broadcast_to(rho0, traj.states.shape))


def test_dephasing_analytic():
    traj = evolve_exact(pauli_model(0, 0, 1.0), density(basis_state("plus")), 1.0, 1e-3)
    x, y, z = bloch(traj.states)
    assert abs(x[-1] - np.exp(-2.0)) < 1e-6
    np.testing.assert_allclose(x, np.exp(-2 * traj.times), atol=1e-6)


def test_precession_analytic():
    traj = evolve_exact(pauli_model(0, 0, 0, beta=1.0), density(basis_state("plus")), 2.0, 1e-3, 10)
    x, y, _ = bloch(traj.states)
    np.testing.assert_allclose(x, np.cos(2 * traj.times), atol=1e-6)
    np.testing.assert_allclose(y, np.sin(2 * traj.times), atol=1e-6)


def test_record_grid():
    traj = evolve_exact(pauli_model(0, 0, 1.0), density(basis_state("plus")), 0.105, 0.005, 4)
    np.testing.assert_allclose(traj.times, [0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.105])


def test_rejects_fractional_steps():
    with pytest.raises(ValueError):
        evolve_exact(pauli_model(0, 0, 1.0), np.eye(2) / 2, 1.0, 0.3)


def test_step_too_large():
    # RK4 on a fast decay with dt far outside the stability region
    me = MasterEquation.build(2, channels=[(200.0, np.array([[0, 1], [0, 0]]))])
    with pytest.raises(StepTooLarge):
        evolve_exact(me, density(basis_state("one")), 1.0, 0.1)


def test_choi_at_zero():
    series = propagator_choi(pauli_model(1, 1, 1), 0.1, 0.01)
    np.testing.assert_allclose(series.eigenvalues[0], [0, 0, 0, 1], atol=1e-12)


def test_choi_cp_semigroup():
    series = propagator_choi(pauli_model(1, 1, 1, beta=1.0), 2.0, 1e-2, 5)
    assert series.min_eigenvalue.min() >= -1e-10


def test_choi_pauli_closed_form():
    # Pauli channel Choi eigenvalues are p_0..p_3 with p from the damping factors
    g = np.array([0.3, 0.5, 0.2])
    t = 0.7
    series = propagator_choi(pauli_model(*g), t, 1e-3)
    lx = np.exp(-2 * (g[1] + g[2]) * t)
    ly = np.exp(-2 * (g[0] + g[2]) * t)
    lz = np.exp(-2 * (g[0] + g[1]) * t)
    p = np.sort([(1 + lx + ly + lz) / 4, (1 + lx - ly - lz) / 4,
                 (1 - lx + ly - lz) / 4, (1 - lx - ly + lz) / 4])
    np.testing.assert_allclose(series.eigenvalues[-1], p, atol=1e-9)


def test_choi_unphysical():
    series = propagator_choi(pauli_model(0, 0, -0.5), 0.5, 1e-3, 10)
    assert series.min_eigenvalue[0] > -1e-12
    assert np.all(series.min_eigenvalue[1:] < 0)


def test_monitor_trivial_cases():
    traj = evolve_exact(pauli_model(0.4, 0.1, 0.2), density(basis_state("zero")), 1.0, 1e-2)
    mon = positivity_monitor(traj)
    assert abs(mon.mu[0]) < 1e-12
    assert mon.first_violation_time is None
    mixed = evolve_exact(pauli_model(0.4, 0.1, 0.2), np.eye(2) / 2, 1.0, 1e-2)
    np.testing.assert_allclose(positivity_monitor(mixed).mu, 0.5, atol=1e-12)


def test_monitor_unphysical():
    traj = evolve_exact(pauli_model(0, 0, -0.5), density(basis_state("plus")), 1.0, 1e-3)
    mon = positivity_monitor(traj)
    assert np.all(mon.mu[1:] < 0)
    assert mon.first_violation_time == pytest.approx(1e-3)
    # eigenvector of the negative eigenvalue is |->
    assert abs(np.vdot(basis_state("minus"), mon.xi[-1])) ** 2 > 1 - 1e-10


@given(seeds)
def test_monitor_matches_closed_form(seed):
    rng = np.random.default_rng(seed)
    g = rng.uniform(-0.5, 1.0, size=3)
    traj = evolve_exact(pauli_model(*g, beta=0.5), random_density(rng), 0.5, 0.01, 10)
    mon = positivity_monitor(traj)
    x, y, z = bloch(traj.states)
    closed = 0.5 * (1 - np.sqrt(x**2 + y**2 + z**2))
    np.testing.assert_allclose(mon.mu, closed, atol=1e-10)


def test_rk4_order():
    me = pauli_model(0, 0, 1.0)
    errs = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        x = bloch(evolve_exact(me, density(basis_state("plus")), 1.0, dt).states[-1])[0]
        errs.append(abs(x - np.exp(-2.0)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 3.9), orders
