"""Weighted elliptic grid generation on a doubly periodic logical lattice.

The new positions solve the five-point scheme

    d_xi(w d_xi z) + d_eta(w d_eta z) = 0,    z = x, y,

with face weights averaged from the nodes. x gains Lx across the j seam and
y gains Ly across the k seam, so each coordinate is written as a linear ramp
plus a periodic part. The constant null space of the periodic part is closed
by prescribing the mean displacement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import ConvergenceError, Grid2D, State2D, TangledMeshError, jacobian_2d, shift_2d
from .swe2d_eulerian import face_metrics

WEIGHT_KINDS = ("gradient", "laplacian_h", "constant")
LAPLACIAN_FORMS = ("nodal", "divergence")
W_FLOOR = 1e-8
DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class WeightSpec:
    """Weight function choice.

    ``laplacian`` selects how h_xx + h_yy is discretized: ``nodal`` applies the
    central physical gradient twice, ``divergence`` uses compact face fluxes
    with the face metric products. ``smooth`` is the number of 1-2-1 filter
    passes applied to w on the logical lattice.
    """
    kind: str = "laplacian_h"
    alpha: float = 0.4
    laplacian: str = "nodal"
    smooth: int = 0

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if not self.alpha >= 0:
            raise ValueError("alpha must be nonnegative")
        if self.laplacian not in LAPLACIAN_FORMS:
            raise ValueError(f"unknown laplacian form {self.laplacian!r}")
        if self.smooth < 0:
            raise ValueError("smooth must be nonnegative")


def _node_metrics(grid: Grid2D):
    """Central node values of y_eta, -x_eta, -y_xi, x_xi (the products J xi_x, ...)."""
    Lx, Ly = grid.Lx, grid.Ly
    x_xi = (shift_2d(grid.x, 1, 0, Lx) - shift_2d(grid.x, -1, 0, Lx)) / (2 * grid.dxi)
    y_xi = (shift_2d(grid.y, 1, 0) - shift_2d(grid.y, -1, 0)) / (2 * grid.dxi)
    x_eta = (shift_2d(grid.x, 0, 1) - shift_2d(grid.x, 0, -1)) / (2 * grid.deta)
    y_eta = (shift_2d(grid.y, 0, 1, 0.0, Ly) - shift_2d(grid.y, 0, -1, 0.0, Ly)) / (2 * grid.deta)
    return y_eta, -x_eta, -y_xi, x_xi


def physical_gradient(grid: Grid2D, f: np.ndarray, J=None):
    """(f_x, f_y) at the nodes through the central metric terms."""
    if J is None:
        J = jacobian_2d(grid)
    xi_x, xi_y, eta_x, eta_y = _node_metrics(grid)
    f_xi = (shift_2d(f, 1, 0) - shift_2d(f, -1, 0)) / (2 * grid.dxi)
    f_eta = (shift_2d(f, 0, 1) - shift_2d(f, 0, -1)) / (2 * grid.deta)
    return (xi_x * f_xi + eta_x * f_eta) / J, (xi_y * f_xi + eta_y * f_eta) / J


def nodal_laplacian(grid: Grid2D, f: np.ndarray, J=None) -> np.ndarray:
    """f_xx + f_yy from two applications of the central physical gradient."""
    if J is None:
        J = jacobian_2d(grid)
    fx, fy = physical_gradient(grid, f, J)
    return physical_gradient(grid, fx, J)[0] + physical_gradient(grid, fy, J)[1]


def smooth_lattice(w: np.ndarray, passes: int) -> np.ndarray:
    for _ in range(passes):
        w = 0.25 * (2 * w + shift_2d(w, 1, 0) + shift_2d(w, -1, 0))
        w = 0.25 * (2 * w + shift_2d(w, 0, 1) + shift_2d(w, 0, -1))
    return w


def physical_laplacian(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    """Divergence-form Laplacian f_xx + f_yy using the face metric products."""
    fm = face_metrics(grid)
    J = fm.J
    xi_x, xi_y, eta_x, eta_y = _node_metrics(grid)
    f_eta = (shift_2d(f, 0, 1) - shift_2d(f, 0, -1)) / (2 * grid.deta)
    f_xi = (shift_2d(f, 1, 0) - shift_2d(f, -1, 0)) / (2 * grid.dxi)

    # xi faces (j+1/2): normal derivative compact, tangential averaged
    Jf = 0.5 * (J + shift_2d(J, 1, 0))
    d_xi = (shift_2d(f, 1, 0) - f) / grid.dxi
    d_eta = 0.5 * (f_eta + shift_2d(f_eta, 1, 0))
    ex = 0.5 * (eta_x + shift_2d(eta_x, 1, 0))
    ey = 0.5 * (eta_y + shift_2d(eta_y, 1, 0))
    fx = (fm.xi_x * d_xi + ex * d_eta) / Jf
    fy = (fm.xi_y * d_xi + ey * d_eta) / Jf
    phi_xi = fm.xi_x * fx + fm.xi_y * fy

    # eta faces (k+1/2)
    Jf = 0.5 * (J + shift_2d(J, 0, 1))
    d_eta = (shift_2d(f, 0, 1) - f) / grid.deta
    d_xi = 0.5 * (f_xi + shift_2d(f_xi, 0, 1))
    gx = 0.5 * (xi_x + shift_2d(xi_x, 0, 1))
    gy = 0.5 * (xi_y + shift_2d(xi_y, 0, 1))
    fx = (gx * d_xi + fm.eta_x * d_eta) / Jf
    fy = (gy * d_xi + fm.eta_y * d_eta) / Jf
    phi_eta = fm.eta_x * fx + fm.eta_y * fy

    div = ((phi_xi - shift_2d(phi_xi, -1, 0)) / grid.dxi
           + (phi_eta - shift_2d(phi_eta, 0, -1)) / grid.deta)
    return div / J


def weight_values(grid: Grid2D, state: State2D, spec: WeightSpec) -> np.ndarray:
    if spec.kind == "constant" or spec.alpha == 0.0:
        return np.ones(grid.shape)
    J = jacobian_2d(grid)
    if not np.all(J > 0):
        raise TangledMeshError("nonpositive Jacobian in weight evaluation")
    if spec.kind == "gradient":
        ux, uy = physical_gradient(grid, state.u, J)
        vx, vy = physical_gradient(grid, state.v, J)
        w = np.sqrt(1.0 + spec.alpha * (ux * ux + uy * uy + vx * vx + vy * vy))
    else:
        if spec.laplacian == "nodal":
            lap = nodal_laplacian(grid, state.h, J)
        else:
            lap = physical_laplacian(grid, state.h)
        w = np.sqrt(1.0 + spec.alpha * lap * lap)
    return smooth_lattice(w, spec.smooth)


def _face_weights(w: np.ndarray):
    w = np.maximum(w, W_FLOOR)
    return 0.5 * (w + shift_2d(w, 1, 0)), 0.5 * (w + shift_2d(w, 0, 1))


def elliptic_residual(hat_grid: Grid2D, w: np.ndarray) -> float:
    """Max-norm of the five-point scheme divided by its diagonal coefficient."""
    we, wn = _face_weights(w)
    ww, ws = shift_2d(we, -1, 0), shift_2d(wn, 0, -1)
    a, b = 1.0 / hat_grid.dxi ** 2, 1.0 / hat_grid.deta ** 2
    diag = a * (we + ww) + b * (wn + ws)
    out = 0.0
    for z, pj, pk in ((hat_grid.x, hat_grid.Lx, 0.0), (hat_grid.y, 0.0, hat_grid.Ly)):
        r = (a * (we * (shift_2d(z, 1, 0, pj, pk) - z) - ww * (z - shift_2d(z, -1, 0, pj, pk)))
             + b * (wn * (shift_2d(z, 0, 1, pj, pk) - z) - ws * (z - shift_2d(z, 0, -1, pj, pk))))
        out = max(out, float(np.max(np.abs(r / diag))))
    return out


def _operator(we: np.ndarray, wn: np.ndarray, dxi: float, deta: float):
    Nx, Ny = we.shape
    n = Nx * Ny
    idx = np.arange(n).reshape(Nx, Ny)
    a, b = 1.0 / dxi ** 2, 1.0 / deta ** 2
    rows, cols, vals = [], [], []
    for coef, nb in ((a * we, np.roll(idx, -1, axis=0)), (b * wn, np.roll(idx, -1, axis=1))):
        c = coef.ravel()
        i, j = idx.ravel(), nb.ravel()
        rows += [i, j, i, j]
        cols += [j, i, i, j]
        vals += [c, c, -c, -c]
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(n, n))


def _direct(grid: Grid2D, we, wn, targets):
    Nx, Ny = grid.shape
    n = Nx * Ny
    Lop = _operator(we, wn, grid.dxi, grid.deta)
    ones = sp.csr_matrix(np.ones((1, n)))
    K = sp.bmat([[Lop, ones.T], [ones, None]], format="csc")
    lu = spla.splu(K)
    a, b = 1.0 / grid.dxi ** 2, 1.0 / grid.deta ** 2
    j = np.arange(Nx)[:, None] * np.ones((1, Ny))
    k = np.ones((Nx, 1)) * np.arange(Ny)[None, :]
    ww, ws = shift_2d(we, -1, 0), shift_2d(wn, 0, -1)
    out = []
    for ramp, step, mean in ((j, grid.Lx / Nx, targets[0]), (k, grid.Ly / Ny, targets[1])):
        base = ramp * step
        # operator applied to the ramp: only differences across faces matter
        if ramp is j:
            Lb = a * step * (we - ww)
        else:
            Lb = b * step * (wn - ws)
        rhs = np.concatenate([-Lb.ravel(), [n * mean - base.sum()]])
        p = lu.solve(rhs)[:n].reshape(Nx, Ny)
        out.append(base + p)
    return out


def _gauss_seidel(grid: Grid2D, we, wn, targets, tol, max_iter, w):
    Nx, Ny = grid.shape
    a, b = 1.0 / grid.dxi ** 2, 1.0 / grid.deta ** 2
    ww, ws = shift_2d(we, -1, 0), shift_2d(wn, 0, -1)
    diag = a * (we + ww) + b * (wn + ws)
    jj, kk = np.meshgrid(np.arange(Nx), np.arange(Ny), indexing="ij")
    colours = [(jj + kk) % 2 == 0, (jj + kk) % 2 == 1]
    z = [grid.x.copy(), grid.y.copy()]
    periods = [(grid.Lx, 0.0), (0.0, grid.Ly)]
    for it in range(1, max_iter + 1):
        for c, (pj, pk) in enumerate(periods):
            for mask in colours:
                zc = z[c]
                new = (a * (we * shift_2d(zc, 1, 0, pj, pk) + ww * shift_2d(zc, -1, 0, pj, pk))
                       + b * (wn * shift_2d(zc, 0, 1, pj, pk) + ws * shift_2d(zc, 0, -1, pj, pk))
                       ) / diag
                zc[mask] = new[mask]
            z[c] += targets[c] - z[c].mean()
        g = grid.with_positions(z[0], z[1])
        if it % 10 == 0 or it == max_iter:
            r = elliptic_residual(g, w)
            if r <= tol:
                return z
    raise ConvergenceError(f"grid solve did not converge (residual {r:.3e})", r, max_iter)


def solve_elliptic_grid(grid: Grid2D, w: np.ndarray, anchor=(0.0, 0.0), tau: float = 0.0,
                        tol: float = DEFAULT_TOL, max_iter: int | None = None,
                        method: str = "direct") -> Grid2D:
    """New grid from the weighted five-point scheme.

    The gauge fixes ``mean(x_new - x) = tau * anchor[0]`` and likewise for y.
    ``method`` is ``"direct"`` (sparse LU on the gauge-augmented system) or
    ``"gauss_seidel"`` (red-black sweeps starting from the current grid).
    """
    w = np.asarray(w, dtype=float)
    if w.shape != grid.shape:
        raise ValueError("weight array does not match the grid")
    if not np.all(w > 0):
        raise ValueError("weights must be positive")
    we, wn = _face_weights(w)
    targets = (grid.x.mean() + tau * anchor[0], grid.y.mean() + tau * anchor[1])
    if method == "direct":
        x, y = _direct(grid, we, wn, targets)
    elif method == "gauss_seidel":
        if max_iter is None:
            max_iter = 50 * grid.x.size
        x, y = _gauss_seidel(grid, we, wn, targets, tol, max_iter, w)
    else:
        raise ValueError(f"unknown method {method!r}")
    out = grid.with_positions(x, y)
    r = elliptic_residual(out, w)
    if r > tol:
        raise ConvergenceError(f"grid residual {r:.3e} above tolerance", r, 1)
    J = jacobian_2d(out)
    if not np.all(J > 0):
        j, k = (int(c[0]) for c in np.nonzero(~(J > 0)))
        raise TangledMeshError(f"generated grid is tangled at ({j}, {k})", (j, k))
    return out


def adapted_grid(grid: Grid2D, state: State2D, spec: WeightSpec, tau: float,
                 tol: float = DEFAULT_TOL, method: str = "direct", relax: float = 1.0) -> Grid2D:
    """Weight from the current state, then the grid solve anchored to the mean flow.

    With ``relax`` < 1 only that fraction of the deformation is applied:
    ``x_new = x + tau*mean(u) + relax*(X - x - tau*mean(u))`` with X the
    elliptic solution. The mean-flow translation is kept whole, so the gauge
    and the shift and boost equivariance are unaffected.
    """
    if not 0 < relax <= 1:
        raise ValueError("relax must lie in (0, 1]")
    w = weight_values(grid, state, spec)
    anchor = (float(np.mean(state.u)), float(np.mean(state.v)))
    target = solve_elliptic_grid(grid, w, anchor, tau, tol, method=method)
    if relax == 1.0:
        return target
    bx, by = grid.x + tau * anchor[0], grid.y + tau * anchor[1]
    out = grid.with_positions(bx + relax * (target.x - bx), by + relax * (target.y - by))
    J = jacobian_2d(out)
    if not np.all(J > 0):
        j, k = (int(c[0]) for c in np.nonzero(~(J > 0)))
        raise TangledMeshError(f"relaxed grid is tangled at ({j}, {k})", (j, k))
    return out
