import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from invariant_swe.core import (
    ConvergenceError,
    Grid1D,
    Grid2D,
    PositivityError,
    State1D,
    State2D,
    TangledMeshError,
    check_step_output_1d,
    ghost_position_1d,
    jacobian_2d,
    periodic_index,
    picard_solve,
    shift_1d,
    shift_2d,
    validate_grid,
)


def test_arrays_are_read_only():
    g = Grid1D.uniform(5, 1.0)
    with pytest.raises(ValueError):
        g.x[0] = 3.0
    s = State2D(np.zeros((3, 3)), np.zeros((3, 3)), np.ones((3, 3)))
    with pytest.raises(ValueError):
        s.h[0, 0] = 0.0


def test_constructor_checks():
    with pytest.raises(ValueError):
        Grid1D([0.0, 1.0], 2.0)
    with pytest.raises(ValueError):
        Grid1D([0.0, 1.0, 2.0], 0.0)
    with pytest.raises(ValueError):
        State1D([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        Grid2D(np.zeros((3, 3)), np.zeros((3, 4)), 1.0, 1.0)


@pytest.mark.parametrize("i,N,expected", [(0, 5, (0, 0)), (5, 5, (0, 1)), (-1, 5, (4, -1)),
                                          (12, 5, (2, 2))])
def test_periodic_index(i, N, expected):
    assert periodic_index(i, N) == expected


def test_ghost_positions():
    g = Grid1D([0.0, 1.0, 2.0], 3.0)
    assert ghost_position_1d(g, 3) == 3.0
    assert ghost_position_1d(g, -1) == -1.0
    assert ghost_position_1d(g, 7) == 7.0


def test_shift_1d_adds_period_on_wrap():
    x = np.array([0.0, 1.0, 2.0])
    assert shift_1d(x, 1, 3.0).tolist() == [1.0, 2.0, 3.0]
    assert shift_1d(x, -1, 3.0).tolist() == [-1.0, 0.0, 1.0]


def test_shift_2d_seams():
    g = Grid2D.uniform(4, 3, 4.0, 3.0)
    xe = shift_2d(g.x, 1, 0, g.Lx)
    assert np.allclose(xe - g.x, 1.0)
    yn = shift_2d(g.y, 0, -1, 0.0, g.Ly)
    assert np.allclose(g.y - yn, 1.0)


def test_uniform_jacobian():
    g = Grid2D.uniform(5, 7, 5.0, 7.0, 1.0, 1.0)
    assert np.allclose(jacobian_2d(g), 1.0)
    assert validate_grid(g) == []


def test_validate_grid_reports_folds():
    assert validate_grid(Grid1D([0.0, 2.0, 1.0], 3.0)) == [1]
    assert validate_grid(Grid1D([0.0, 1.0, 3.5], 3.0)) == [2]
    g = Grid2D.uniform(4, 4, 4.0, 4.0, 1.0, 1.0)
    x = g.x.copy()
    x[1, 1] = 3.5
    assert validate_grid(g.with_positions(x, g.y))


def test_step_output_checks():
    with pytest.raises(TangledMeshError):
        check_step_output_1d(Grid1D([0.0, 2.0, 1.0], 3.0), State1D([0, 0, 0], [1, 1, 1]))
    with pytest.raises(PositivityError) as e:
        check_step_output_1d(Grid1D([0.0, 1.0, 2.0], 3.0), State1D([0, 0, 0], [1, 0, 1]))
    assert e.value.index == 1


def test_picard_contraction():
    q, its, r = picard_solve(lambda q: 0.5 * q + 1.0, lambda q: abs(float(q[0]) - 2.0),
                             np.array([0.0]), 1e-12, 200)
    assert abs(q[0] - 2.0) <= 1e-12 and its < 60


def test_picard_nonconvergence_carries_residual():
    with pytest.raises(ConvergenceError) as e:
        picard_solve(lambda q: q + 1.0, lambda q: 1.0, np.zeros(1), 1e-12, 5)
    assert e.value.residual == 1.0 and e.value.iterations == 5


@given(st.integers(-50, 50), st.integers(1, 20))
def test_periodic_index_roundtrip(i, N):
    idx, wrap = periodic_index(i, N)
    assert 0 <= idx < N and idx + wrap * N == i
