"""Finite-volume Lagrangian schemes on a doubly periodic quadrilateral mesh.

The A-grid nodes are the cell centres and move with the fluid. Cell corners
are auxiliary: corner (j+1/2, k+1/2) sits at the mean of its four
surrounding centres and carries values interpolated from those centres.
Cell (j, k) is the quadrilateral spanned by its four corners taken
counterclockwise, and fluxes are trapezoidal edge sums over that polygon.
"""

from __future__ import annotations

import numpy as np

from .core import (
    Grid2D,
    PositivityError,
    State2D,
    TangledMeshError,
    picard_solve,
    shift_2d,
)
from .sibson import sibson_weights, sibson_weights_batch

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 200

# 4x4 block of centres around plaquette (j+1/2, k+1/2): offsets -1..2 in each direction
_BLOCK = [(dj, dk) for dj in (-1, 0, 1, 2) for dk in (-1, 0, 1, 2)]
# adjacent centres (j,k), (j+1,k), (j+1,k+1), (j,k+1)
_ADJ_OFFSETS = [(0, 0), (1, 0), (1, 1), (0, 1)]
_ADJ = np.array([_BLOCK.index(o) for o in _ADJ_OFFSETS])
# corners of cell (j,k), counterclockwise, as plaquette offsets
_CELL_CORNERS = [(-1, -1), (0, -1), (0, 0), (-1, 0)]


def polygon_area(corners) -> float:
    """Shoelace area of a counterclockwise polygon; raises on nonpositive area."""
    p = np.asarray(corners, dtype=float)
    x, y = p[:, 0] - p[0, 0], p[:, 1] - p[0, 1]
    area = 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    if not area > 0:
        raise TangledMeshError(f"polygon area {area!r} is not positive")
    return area


def corner_weights(centers, corner, neighbourhood=None) -> np.ndarray:
    """Sibson weights of ``corner`` over its four adjacent ``centers``."""
    return sibson_weights(corner, centers, neighbourhood)


def corner_positions(grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    """Corner (j+1/2, k+1/2) positions: mean of the four surrounding centres."""
    cx = np.zeros(grid.shape)
    cy = np.zeros(grid.shape)
    for dj, dk in _ADJ_OFFSETS:
        sx, sy = grid.shifted(dj, dk)
        cx += sx
        cy += sy
    return 0.25 * cx, 0.25 * cy


def interpolation_weights(grid: Grid2D, interp: str = "sibson"):
    """Weights (Nx, Ny, 4) over the adjacent centres ordered as ``_ADJ_OFFSETS``."""
    Nx, Ny = grid.shape
    if interp == "mean":
        return np.full((Nx, Ny, 4), 0.25)
    if interp != "sibson":
        raise ValueError(f"unknown interpolation {interp!r}")
    px, py = corner_positions(grid)
    cx = np.empty((Nx * Ny, len(_BLOCK)))
    cy = np.empty((Nx * Ny, len(_BLOCK)))
    for n, (dj, dk) in enumerate(_BLOCK):
        sx, sy = grid.shifted(dj, dk)
        cx[:, n] = (sx - px).ravel()
        cy[:, n] = (sy - py).ravel()
    w, status = sibson_weights_batch(cx, cy, _ADJ)
    if np.any(status != 0):
        m = int(np.nonzero(status)[0][0])
        raise TangledMeshError(
            f"natural-neighbour weights undefined at corner {divmod(m, Ny)}", divmod(m, Ny))
    return w.reshape(Nx, Ny, 4)


def interpolate_corners(grid: Grid2D, state: State2D, interp: str = "sibson", weights=None):
    """Corner values (u, v, h) as convex combinations of the adjacent centre values."""
    if weights is None:
        weights = interpolation_weights(grid, interp)
    out = []
    for f in (state.u, state.v, state.h):
        acc = np.zeros(grid.shape)
        for q, (dj, dk) in enumerate(_ADJ_OFFSETS):
            acc += weights[..., q] * shift_2d(f, dj, dk)
        out.append(acc)
    return tuple(out)


def _cell_geometry(grid: Grid2D):
    """Corner positions of every cell relative to its centre, counterclockwise."""
    px, py = corner_positions(grid)
    xs, ys = [], []
    for dj, dk in _CELL_CORNERS:
        xs.append(shift_2d(px, dj, dk, grid.Lx, 0.0) - grid.x)
        ys.append(shift_2d(py, dj, dk, 0.0, grid.Ly) - grid.y)
    return xs, ys


def _cell_values(vals):
    return [[shift_2d(f, dj, dk) for dj, dk in _CELL_CORNERS] for f in vals]


def edge_sums(grid: Grid2D, state: State2D, interp: str = "sibson"):
    """Cell area and the three edge sums of the explicit step.

    Returns ``(A, S_div, S_x, S_y)`` with
    ``S_div = sum[(u_i+u_{i+1})(y_{i+1}-y_i) - (v_i+v_{i+1})(x_{i+1}-x_i)]``,
    ``S_x = sum (h_i+h_{i+1})(y_{i+1}-y_i)``, ``S_y = sum (h_i+h_{i+1})(x_{i+1}-x_i)``.
    """
    xs, ys = _cell_geometry(grid)
    us, vs, hs = _cell_values(interpolate_corners(grid, state, interp))
    A = np.zeros(grid.shape)
    S_div = np.zeros(grid.shape)
    S_x = np.zeros(grid.shape)
    S_y = np.zeros(grid.shape)
    for i in range(4):
        n = (i + 1) % 4
        A += xs[i] * ys[n] - xs[n] * ys[i]
        dy = ys[n] - ys[i]
        dx = xs[n] - xs[i]
        S_div += (us[i] + us[n]) * dy - (vs[i] + vs[n]) * dx
        S_x += (hs[i] + hs[n]) * dy
        S_y += (hs[i] + hs[n]) * dx
    A *= 0.5
    if not np.all(A > 0):
        j, k = (int(c[0]) for c in np.nonzero(~(A > 0)))
        raise TangledMeshError(f"cell ({j}, {k}) has nonpositive area", (j, k))
    return A, S_div, S_x, S_y


def _check_depth(h):
    if not np.all(h > 0):
        j, k = (int(c[0]) for c in np.nonzero(~(h > 0)))
        raise PositivityError(f"nonpositive depth at cell ({j}, {k})", (j, k))


def step_fv_explicit(grid: Grid2D, state: State2D, tau: float, interp: str = "sibson"):
    u, v, h = state.u, state.v, state.h
    A, S_div, S_x, S_y = edge_sums(grid, state, interp)
    new_grid = grid.with_positions(grid.x + tau * u, grid.y + tau * v)
    new_state = State2D(u - tau * S_x / (2 * A), v + tau * S_y / (2 * A),
                        h - tau * h * S_div / (2 * A))
    _check_depth(new_state.h)
    edge_sums(new_grid, new_state, interp)  # tangling check on the new cells
    return new_grid, new_state


def step_fv_trapezoidal(grid: Grid2D, state: State2D, tau: float, tol: float = DEFAULT_TOL,
                        max_iter: int = DEFAULT_MAX_ITER, interp: str = "sibson",
                        return_info: bool = False):
    x, y, u, v, h = grid.x, grid.y, state.u, state.v, state.h
    shape = grid.shape
    n = h.size
    A, S_div, S_x, S_y = edge_sums(grid, state, interp)
    old_h = h * S_div / (4 * A)
    old_u = S_x / (4 * A)
    old_v = S_y / (4 * A)

    def split(q):
        return [q[i * n:(i + 1) * n].reshape(shape) for i in range(5)]

    def hatted(q):
        X, Y, U, V, H = split(q)
        g = grid.with_positions(X, Y)
        Ah, Sd, Sx, Sy = edge_sums(g, State2D(U, V, H), interp)
        return X, Y, U, V, H, Ah, Sd, Sx, Sy

    def update(q):
        X, Y, U, V, H, Ah, Sd, Sx, Sy = hatted(q)
        return np.concatenate([
            (x + 0.5 * tau * (u + U)).ravel(),
            (y + 0.5 * tau * (v + V)).ravel(),
            (u - tau * (old_u + Sx / (4 * Ah))).ravel(),
            (v + tau * (old_v + Sy / (4 * Ah))).ravel(),
            (h - tau * (old_h + H * Sd / (4 * Ah))).ravel(),
        ])

    def residual(q):
        X, Y, U, V, H, Ah, Sd, Sx, Sy = hatted(q)
        return max(
            np.max(np.abs(X - x - 0.5 * tau * (u + U))),
            np.max(np.abs(Y - y - 0.5 * tau * (v + V))),
            np.max(np.abs(U - u + tau * (old_u + Sx / (4 * Ah)))),
            np.max(np.abs(V - v - tau * (old_v + Sy / (4 * Ah)))),
            np.max(np.abs(H - h + tau * (old_h + H * Sd / (4 * Ah)))),
        )

    q0 = np.concatenate([(x + tau * u).ravel(), (y + tau * v).ravel(), u.ravel(), v.ravel(),
                         h.ravel()])
    q, its, r = picard_solve(update, residual, q0, tol, max_iter)
    X, Y, U, V, H = split(q)
    _check_depth(H)
    new_grid = grid.with_positions(X, Y)
    new_state = State2D(U, V, H)
    if return_info:
        return new_grid, new_state, its, r
    return new_grid, new_state
