import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rodeo.errors import DimensionUnsupported, GridMismatch
from rodeo.exact import DensityTrajectory
from rodeo.model import basis_state, density
from rodeo.observables import BlochSeries, bloch, bloch_series, compare, expectation, from_bloch


@pytest.mark.parametrize(
    "rho, expected",
    [
        (np.eye(2) / 2, (0, 0, 0)),
        (density(basis_state("zero")), (0, 0, 1)),
        (density(basis_state("plus")), (1, 0, 0)),
        (density(basis_state("plus_i")), (0, 1, 0)),
    ],
)
def test_bloch(rho, expected):
    np.testing.assert_allclose(bloch(rho), expected, atol=1e-15)


def test_bloch_qubit_only():
    with pytest.raises(DimensionUnsupported):
        bloch(np.eye(3) / 3)
    assert expectation(np.eye(3) / 3, np.diag([1.0, 2.0, 3.0])) == pytest.approx(2.0)


ball = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: sum(c * c for c in v) <= 1)


@given(ball)
def test_round_trip(v):
    np.testing.assert_allclose(bloch(from_bloch(*v)), v, atol=1e-12)


def test_stderr_mapping():
    # x = 2 Re rho01, y = -2 Im rho01, z = 2 rho00 - 1
    err = np.array([[[0.1, 0.02 + 0.03j], [0.02 + 0.03j, 0.1]]])
    traj = DensityTrajectory(np.array([0.0]), np.eye(2)[None] / 2, err)
    s = bloch_series(traj)
    np.testing.assert_allclose([s.stderr_x[0], s.stderr_y[0], s.stderr_z[0]], [0.04, 0.06, 0.2])


def series(x, err=0.0, n=5):
    t = np.linspace(0, 1, n)
    v = np.full(n, x, dtype=float)
    e = np.full(n, err)
    return BlochSeries(t, v, v, v, e, e, e)


def test_compare_identical():
    rep = compare(series(0.3, 0.01), series(0.3, 0.01))
    assert rep.passed
    assert all(v == 0 for v in rep.max_deviation.values())


def test_compare_offset_fails():
    rep = compare(series(0.1, 0.01), series(0.0), n_sigma=5)
    np.testing.assert_allclose(rep.z_scores["x"], 10.0)
    assert not rep.passed
    # a floor wider than the offset rescues it
    assert compare(series(0.1, 0.01), series(0.0), n_sigma=5, floor=0.2).passed


def test_compare_grid_mismatch():
    with pytest.raises(GridMismatch):
        compare(series(0, n=5), series(0, n=6))
