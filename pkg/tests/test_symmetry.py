import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fig2_data
from invariant_swe import swe1d
from invariant_swe.core import Grid1D, State1D
from invariant_swe.symmetry import (
    GroupElement1D,
    GroupElement2D,
    act_1d,
    act_2d,
    check_equivariance,
    compose_1d,
    compose_2d,
    difference_invariants_1d,
)


def lagrangian_explicit(t, g, s, tau):
    r = swe1d.step_lagrangian_explicit(g, s, tau)
    return r.hat_grid, r.hat_state


def test_boost_moves_points_with_time():
    g = Grid1D([0.0, 1.0, 2.0], 3.0)
    s = State1D([5.0, 5.0, 5.0], [1.0, 1.0, 1.0])
    t1, g1, s1 = act_1d(GroupElement1D(eps=1.0), 2.0, g, s)
    assert t1 == 2.0 and g1.x[0] == 2.0 and s1.u[0] == 6.0


def test_identity_is_bit_exact():
    g, s = fig2_data()
    t, g1, s1 = act_1d(GroupElement1D(), 0.3, g, s)
    assert g1 is g and s1 is s and t == 0.3


def test_2d_shifts_move_positions_only():
    from conftest import fig4_data
    g, s = fig4_data(5)
    _, g1, s1 = act_2d(GroupElement2D(dx=1.0, dy=-1.0), 0.0, g, s)
    assert np.array_equal(g1.x, g.x + 1.0) and np.array_equal(g1.y, g.y - 1.0)
    assert s1 is not s and np.array_equal(s1.u, s.u)


def test_scalings_act_on_h_quadratically():
    g, s = fig2_data(7)
    _, g1, s1 = act_1d(GroupElement1D(b=0.5), 0.0, g, s)
    assert np.allclose(s1.h, math.e * s.h) and np.allclose(g1.x, math.exp(0.5) * g.x)
    assert g1.L == pytest.approx(math.exp(0.5) * g.L)


elements_1d = st.builds(GroupElement1D, *(st.floats(-1, 1) for _ in range(3)),
                        st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
elements_2d = st.builds(GroupElement2D, *(st.floats(-1, 1) for _ in range(5)))


@given(elements_1d, elements_1d)
def test_composition_matches_sequential_action_1d(g1, g2):
    g, s = fig2_data(7)
    a = act_1d(g2, *act_1d(g1, 0.4, g, s))
    b = act_1d(compose_1d(g2, g1), 0.4, g, s)
    assert a[0] == pytest.approx(b[0], abs=1e-12)
    assert np.allclose(a[1].x, b[1].x, atol=1e-12) and np.allclose(a[2].u, b[2].u, atol=1e-12)
    assert np.allclose(a[2].h, b[2].h, rtol=1e-12)


@given(elements_2d, elements_2d)
def test_composition_matches_sequential_action_2d(g1, g2):
    from conftest import fig4_data
    g, s = fig4_data(4)
    a = act_2d(g2, *act_2d(g1, 0.4, g, s))
    b = act_2d(compose_2d(g2, g1), 0.4, g, s)
    assert np.allclose(a[1].x, b[1].x, atol=1e-12) and np.allclose(a[1].y, b[1].y, atol=1e-12)
    assert np.allclose(a[2].v, b[2].v, atol=1e-12)


@settings(max_examples=40)
@given(elements_1d)
def test_difference_invariants_are_invariant(g):
    grid, s = fig2_data(9)
    tau = 0.05
    r = swe1d.step_lagrangian_explicit(grid, s, tau)
    base = difference_invariants_1d(grid, r.hat_grid, s, r.hat_state, tau, 3).as_array()
    t0, g0, s0 = act_1d(g, 0.0, grid, s)
    t1, g1, s1 = act_1d(g, tau, r.hat_grid, r.hat_state)
    moved = difference_invariants_1d(g0, g1, s0, s1, t1 - t0, 3).as_array()
    assert np.allclose(moved, base, rtol=1e-9, atol=1e-12)


def test_static_lagrangian_match_gives_zero_I1():
    g = Grid1D.uniform(6, 3.0)
    s = State1D(np.full(6, 0.7), np.full(6, 2.0))
    gh = Grid1D(g.x + 0.1 * 0.7, g.L)
    assert difference_invariants_1d(g, gh, s, s, 0.1, 2)[1] == pytest.approx(0.0, abs=1e-15)


def test_degenerate_stencil_raises():
    from invariant_swe.core import TangledMeshError
    g = Grid1D([0.0, 0.0, 1.0], 3.0)
    s = State1D([0, 0, 0], [1, 1, 1])
    with pytest.raises(TangledMeshError):
        difference_invariants_1d(g, g, s, s, 0.1, 1)


def test_identity_equivariance_is_exact():
    g, s = fig2_data()
    assert check_equivariance(lagrangian_explicit, GroupElement1D(), 0.0, g, s, 1e-3) == 0.0


def test_boost_equivariance_explicit_lagrangian():
    g, s = fig2_data()
    d = check_equivariance(lagrangian_explicit, GroupElement1D(eps=0.3), 0.0, g, s, 1e-3)
    assert d <= 1e-12


def test_scaling_and_boost_equivariance_trapezoidal():
    g, s = fig2_data()

    def step(t, grid, state, tau):
        r = swe1d.step_lagrangian_trapezoidal(grid, state, tau)
        return r.hat_grid, r.hat_state

    d = check_equivariance(step, GroupElement1D(eps=0.1, a=0.2, b=0.2), 0.0, g, s, 1e-3)
    assert d <= 1e-11


def test_eulerian_shift_equivariance():
    from conftest import fig4_data
    from invariant_swe.config import PRESETS
    from invariant_swe.runner import make_stepper
    cfg = PRESETS["fig5"].with_values(Nx=15, Ny=15)
    g, s = fig4_data(15)
    d = check_equivariance(make_stepper(cfg), GroupElement2D(dx=1.7), 0.0, g, s, 1e-3)
    assert d <= 1e-10
