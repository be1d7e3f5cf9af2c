import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fig4_data, perturbed_grid_2d
from invariant_swe import swe2d_lagrangian as fv
from invariant_swe.core import Grid2D, State2D, TangledMeshError
from invariant_swe.symmetry import GroupElement2D, check_equivariance


def test_polygon_area():
    assert fv.polygon_area([(0, 0), (1, 0), (1, 1), (0, 1)]) == 1.0
    assert fv.polygon_area([(0, 0), (2, 0), (2, 2), (0, 2)]) == 4.0
    with pytest.raises(TangledMeshError):
        fv.polygon_area([(0, 0), (0, 1), (1, 1), (1, 0)])


def test_centroid_weights_are_quarters():
    adj = [(0, 0), (1, 0), (1, 1), (0, 1)]
    w = fv.corner_weights(adj, (0.5, 0.5))
    assert np.allclose(w, 0.25, atol=1e-14)


def test_corner_near_a_centre_takes_its_value():
    adj = [(0, 0), (1, 0), (1, 1), (0, 1)]
    w = fv.corner_weights(adj, (1e-7, 1e-7))
    assert w[0] > 1 - 1e-5


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.0, 0.25))
def test_weights_partition_of_unity(seed, amp):
    g = perturbed_grid_2d(Grid2D.uniform(6, 6), amp * 2 * np.pi / 6, seed)
    w = fv.interpolation_weights(g)
    assert np.all(w >= -1e-15) and np.all(w <= 1 + 1e-15)
    assert np.allclose(w.sum(axis=-1), 1.0, atol=1e-13)


def test_mean_interpolation_switch():
    g, _ = fig4_data(6)
    assert np.all(fv.interpolation_weights(g, "mean") == 0.25)
    with pytest.raises(ValueError):
        fv.interpolation_weights(g, "cubic")


def test_constant_field_corners(fig4):
    g, _ = fig4
    g = perturbed_grid_2d(g, 0.05)
    c = np.full(g.shape, 3.0)
    for f in fv.interpolate_corners(g, State2D(c, c, c)):
        assert np.allclose(f, 3.0, atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1),
       st.floats(-1, 1))
def test_divergence_exact_for_affine_fields(seed, a, b, c, d):
    # mean interpolation at the mean-of-centres corner is exact for affine fields
    g = perturbed_grid_2d(Grid2D.uniform(8, 8, 8.0, 8.0), 0.2, seed)
    u = a * g.x + b * g.y
    v = c * g.x + d * g.y
    A, S_div, _, _ = fv.edge_sums(g, State2D(u, v, np.ones(g.shape)), "mean")
    inner = (slice(2, 6), slice(2, 6))
    assert np.allclose((S_div / (2 * A))[inner], a + d, rtol=0, atol=1e-12)


def test_constant_state_translates():
    g = perturbed_grid_2d(Grid2D.uniform(8, 8), 0.05)
    s = State2D(np.full(g.shape, 0.3), np.full(g.shape, -0.2), np.full(g.shape, 5.0))
    g1, s1 = fv.step_fv_explicit(g, s, 0.01)
    assert np.allclose(g1.x, g.x + 0.003, atol=1e-14) and np.allclose(g1.y, g.y - 0.002, atol=1e-14)
    assert np.allclose(s1.h, 5.0, atol=1e-13) and np.allclose(s1.u, 0.3, atol=1e-13)
    g2, s2, its, _ = fv.step_fv_trapezoidal(g, s, 0.01, return_info=True)
    assert its == 1 and np.allclose(g2.x, g1.x, atol=1e-14)


@pytest.mark.parametrize("scheme", ["explicit", "trapezoidal"])
def test_boost_equivariance(fig4, scheme):
    g, s = fig4

    def step(t, grid, state, tau):
        if scheme == "explicit":
            return fv.step_fv_explicit(grid, state, tau)
        return fv.step_fv_trapezoidal(grid, state, tau)

    for elem in (GroupElement2D(eps1=0.6), GroupElement2D(eps2=-0.4, dx=0.3)):
        d = check_equivariance(step, elem, 0.0, g, s, 1e-3)
        assert d <= (1e-12 if scheme == "explicit" else 1e-11)


def test_trapezoidal_matches_explicit_to_second_order(fig4):
    g, s = fig4
    diffs = []
    for tau in (2e-3, 1e-3):
        a_g, a_s = fv.step_fv_trapezoidal(g, s, tau)
        b_g, b_s = fv.step_fv_explicit(g, s, tau)
        diffs.append(max(np.max(np.abs(a_s.h - b_s.h)), np.max(np.abs(a_g.x - b_g.x)),
                         np.max(np.abs(a_s.u - b_s.u))))
    assert diffs[0] / diffs[1] == pytest.approx(4.0, rel=0.1)


def test_tangled_cell_detected():
    g = Grid2D.uniform(5, 5, 5.0, 5.0, 1.0, 1.0)
    x = g.x.copy()
    x[2, :] += 4.5   # column 2 jumps past column 3, folding the corner lattice
    s = State2D(np.zeros(g.shape), np.zeros(g.shape), np.ones(g.shape))
    with pytest.raises(TangledMeshError):
        fv.step_fv_explicit(g.with_positions(x, g.y), s, 0.01, interp="mean")
