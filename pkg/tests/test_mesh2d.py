import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fig4_data, perturbed_grid_2d
from invariant_swe import mesh2d
from invariant_swe.core import ConvergenceError, Grid2D, State2D, jacobian_2d
from invariant_swe.symmetry import GroupElement2D, act_2d


def test_weight_spec_validation():
    for bad in (dict(kind="x"), dict(alpha=-1.0), dict(laplacian="spectral"), dict(smooth=-1)):
        with pytest.raises(ValueError):
            mesh2d.WeightSpec(**bad)


@pytest.mark.parametrize("kind", ["gradient", "laplacian_h"])
def test_constant_state_and_zero_alpha_give_unit_weight(kind):
    g, s = fig4_data(9)
    c = np.ones(g.shape)
    assert np.allclose(mesh2d.weight_values(g, State2D(c, c, c), mesh2d.WeightSpec(kind, 0.4)), 1)
    assert np.all(mesh2d.weight_values(g, s, mesh2d.WeightSpec(kind, 0.0)) == 1)


@pytest.mark.parametrize("form", ["nodal", "divergence"])
def test_laplacian_forms_are_consistent(form):
    errs = []
    for N in (16, 32):
        g = perturbed_grid_2d(Grid2D.uniform(N, N), 0.0)
        h = np.cos(g.x) * np.cos(2 * g.y)
        lap = (mesh2d.nodal_laplacian(g, h) if form == "nodal"
               else mesh2d.physical_laplacian(g, h))
        errs.append(np.max(np.abs(lap + 5 * h)))
    assert errs[1] < errs[0] / 3.5


def test_smoothing_keeps_constants_and_mean():
    w = np.random.default_rng(0).uniform(1, 2, (7, 9))
    assert np.allclose(mesh2d.smooth_lattice(np.full((7, 9), 3.0), 4), 3.0)
    assert mesh2d.smooth_lattice(w, 3).mean() == pytest.approx(w.mean(), rel=1e-13)
    assert np.ptp(mesh2d.smooth_lattice(w, 3)) < np.ptp(w)


@pytest.mark.parametrize("method", ["direct", "gauss_seidel"])
def test_unit_weight_gives_uniform_lattice(method):
    g0 = Grid2D.uniform(12, 10)
    g = perturbed_grid_2d(g0, 0.1)
    out = mesh2d.solve_elliptic_grid(g, np.ones(g.shape), tol=1e-12, method=method)
    shift_x = out.x.mean() - g0.x.mean()
    shift_y = out.y.mean() - g0.y.mean()
    assert np.max(np.abs(out.x - g0.x - shift_x)) <= 1e-10
    assert np.max(np.abs(out.y - g0.y - shift_y)) <= 1e-10
    assert shift_x == pytest.approx(g.x.mean() - g0.x.mean(), abs=1e-13)


def test_residual_gauge_and_clustering():
    g = Grid2D.uniform(24, 24)
    # large weight along the vertical line x = pi
    w = 1 + 20 * np.exp(-((g.x - np.pi) / 0.3) ** 2)
    out = mesh2d.solve_elliptic_grid(g, w, anchor=(0.5, -0.2), tau=0.1)
    assert mesh2d.elliptic_residual(out, w) <= 1e-10
    assert np.mean(out.x - g.x) == pytest.approx(0.05, abs=1e-13)
    assert np.mean(out.y - g.y) == pytest.approx(-0.02, abs=1e-13)
    gaps = np.diff(out.x[:, 0])
    near = np.argmin(np.abs(out.x[:-1, 0] - np.pi))
    assert gaps[near] < 0.5 * gaps.mean()


def test_direct_and_gauss_seidel_agree():
    g, s = fig4_data(15)
    w = mesh2d.weight_values(g, s, mesh2d.WeightSpec("laplacian_h", 4.0))
    a = mesh2d.solve_elliptic_grid(g, w, tol=1e-11)
    b = mesh2d.solve_elliptic_grid(g, w, tol=1e-11, method="gauss_seidel")
    assert max(np.max(np.abs(a.x - b.x)), np.max(np.abs(a.y - b.y))) <= 1e-9


def test_gauss_seidel_iteration_limit():
    g, s = fig4_data(15)
    w = mesh2d.weight_values(g, s, mesh2d.WeightSpec("laplacian_h", 4.0))
    with pytest.raises(ConvergenceError):
        mesh2d.solve_elliptic_grid(g, w, method="gauss_seidel", max_iter=3)


def test_bad_weights_rejected():
    g = Grid2D.uniform(5, 5)
    with pytest.raises(ValueError):
        mesh2d.solve_elliptic_grid(g, np.zeros((5, 5)))
    with pytest.raises(ValueError):
        mesh2d.solve_elliptic_grid(g, np.ones((4, 5)))
    with pytest.raises(ValueError):
        mesh2d.solve_elliptic_grid(g, np.ones((5, 5)), method="multigrid")


@settings(max_examples=15, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-2, 2), st.floats(-2, 2),
       st.floats(0.2, 1.0))
def test_adapted_grid_equivariance(e1, e2, dx, dy, relax):
    g, s = fig4_data(13)
    g = perturbed_grid_2d(g, 0.03)
    spec = mesh2d.WeightSpec("laplacian_h", 0.4, smooth=1)
    tau, t = 1e-2, 0.3
    elem = GroupElement2D(dx=dx, dy=dy, eps1=e1, eps2=e2)
    hat = mesh2d.adapted_grid(g, s, spec, tau, relax=relax)
    _, gb, sb = act_2d(elem, t, g, s)
    hat_b = mesh2d.adapted_grid(gb, sb, spec, tau, relax=relax)
    _, expected, _ = act_2d(elem, t + tau, hat, s)
    assert max(np.max(np.abs(hat_b.x - expected.x)), np.max(np.abs(hat_b.y - expected.y))) <= 1e-11


def test_relaxation_keeps_mean_translation():
    g, s = fig4_data(13)
    spec = mesh2d.WeightSpec("laplacian_h", 0.4)
    full = mesh2d.adapted_grid(g, s, spec, 0.1)
    part = mesh2d.adapted_grid(g, s, spec, 0.1, relax=0.25)
    base = g.x + 0.1 * s.u.mean()
    assert np.allclose(part.x - base, 0.25 * (full.x - base), atol=1e-13)
    assert np.all(jacobian_2d(part) > 0)
    with pytest.raises(ValueError):
        mesh2d.adapted_grid(g, s, spec, 0.1, relax=0.0)
