"""Time steps for the periodic 1D shallow-water equations on moving meshes.

Six schemes live here:

* Lagrangian (mesh moves with the fluid) explicit and trapezoidal steps of
  the primitive form ``u_t + u u_x + h_x = 0``, ``h_t + (u h)_x = 0``;
* the same two for the momentum (conservative) form;
* computational-coordinate steps, primitive and conservative, explicit and
  trapezoidal, for an externally supplied mesh velocity.

Every step returns a :class:`Step1DResult` and checks the new grid for
tangling and the new depth for positivity before returning.

Residual conventions: all implicit systems are solved to a max-norm residual
measured in "update form", i.e. the scheme equations multiplied through by
the time step, so that the residual has the units of the unknowns.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    Grid1D,
    State1D,
    TangledMeshError,
    check_step_output_1d,
    picard_solve,
)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 200


@dataclass(frozen=True, eq=False)
class Step1DResult:
    hat_grid: Grid1D
    hat_state: State1D
    iterations: int = 0
    residual: float = 0.0


def _nb(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.roll(z, 1), np.roll(z, -1)


def _spacing(x: np.ndarray, L: float) -> np.ndarray:
    # x_{i+1} - x_{i-1}; the two seam nodes pick up one period
    d = np.roll(x, -1) - np.roll(x, 1)
    d[0] += L
    d[-1] += L
    return d


def _D(z: np.ndarray, dx: np.ndarray) -> np.ndarray:
    zm, zp = _nb(z)
    return (zp - zm) / dx


def _A(z: np.ndarray, u: np.ndarray, w: np.ndarray, dx: np.ndarray) -> np.ndarray:
    c = (u - w) * z
    cm, cp = _nb(c)
    return (cp - cm) / dx


def _checked_spacing(grid: Grid1D) -> np.ndarray:
    dx = _spacing(grid.x, grid.L)
    if not np.all(dx != 0):
        i = int(np.nonzero(dx == 0)[0][0])
        raise TangledMeshError(f"degenerate stencil at node {i}", i)
    return dx


def _cfl_warning(grid: Grid1D, state: State1D, tau: float, rel_velocity) -> None:
    gaps = np.diff(np.append(grid.x, grid.x[0] + grid.L))
    cfl = tau * np.max(np.abs(rel_velocity) + np.sqrt(np.abs(state.h))) / np.min(gaps)
    if cfl > 1.0:
        warnings.warn(f"explicit step with advisory CFL number {cfl:.3f} > 1", RuntimeWarning,
                      stacklevel=3)


def _finish(grid: Grid1D, x_hat, u_hat, h_hat, iterations=0, residual=0.0) -> Step1DResult:
    hat_grid = Grid1D(x_hat, grid.L)
    hat_state = State1D(u_hat, h_hat)
    check_step_output_1d(hat_grid, hat_state)
    return Step1DResult(hat_grid, hat_state, iterations, float(residual))


def mesh_velocity(grid: Grid1D, hat_grid: Grid1D, tau: float) -> np.ndarray:
    """(x_hat - x) / tau at every node."""
    return (hat_grid.x - grid.x) / tau


def flux_D(z, grid: Grid1D, i: int) -> float:
    """Central quotient (z_{i+1} - z_{i-1}) / (x_{i+1} - x_{i-1}) at node i."""
    dx = _checked_spacing(grid)
    return float(_D(np.asarray(z, dtype=float), dx)[i % grid.N])


def flux_A(z, grid: Grid1D, hat_grid: Grid1D, state: State1D, tau: float, i: int) -> float:
    """Relative-velocity flux quotient at node i.

    ``[(u_{i+1} - xdot_{i+1}) z_{i+1} - (u_{i-1} - xdot_{i-1}) z_{i-1}] / (x_{i+1} - x_{i-1})``
    with the mesh velocity ``xdot = (x_hat - x) / tau``. The hatted variant is
    obtained by passing the hatted grid and state as ``grid``/``state`` and
    the original pair's mesh velocity through :func:`flux_A_values`.
    """
    dx = _checked_spacing(grid)
    w = mesh_velocity(grid, hat_grid, tau)
    return float(_A(np.asarray(z, dtype=float), state.u, w, dx)[i % grid.N])


def flux_A_values(z, grid: Grid1D, state: State1D, w) -> np.ndarray:
    """Vectorised relative-velocity flux for a given mesh velocity ``w``."""
    return _A(np.asarray(z, dtype=float), state.u, np.asarray(w, dtype=float),
              _checked_spacing(grid))


def flux_D_values(z, grid: Grid1D) -> np.ndarray:
    return _D(np.asarray(z, dtype=float), _checked_spacing(grid))


# -- Lagrangian primitive form -------------------------------------------------

def step_lagrangian_explicit(grid: Grid1D, state: State1D, tau: float) -> Step1DResult:
    u, h = state.u, state.h
    dx = _checked_spacing(grid)
    _cfl_warning(grid, state, tau, 0.0)
    x_hat = grid.x + tau * u
    u_hat = u - tau * _D(h, dx)
    h_hat = h - tau * h * _D(u, dx)
    return _finish(grid, x_hat, u_hat, h_hat)


def residual_lagrangian_trapezoidal(grid: Grid1D, hat_grid: Grid1D, state: State1D,
                                    hat_state: State1D, tau: float) -> dict[str, np.ndarray]:
    u, h, uh_, hh_ = state.u, state.h, hat_state.u, hat_state.h
    dx = _spacing(grid.x, grid.L)
    dxh = _spacing(hat_grid.x, grid.L)
    return {
        "x": hat_grid.x - grid.x - 0.5 * tau * (u + uh_),
        "u": uh_ - u + 0.5 * tau * (_D(h, dx) + _D(hh_, dxh)),
        "h": hh_ - h + 0.5 * tau * (h * _D(u, dx) + hh_ * _D(uh_, dxh)),
    }


def step_lagrangian_trapezoidal(grid: Grid1D, state: State1D, tau: float,
                                tol: float = DEFAULT_TOL,
                                max_iter: int = DEFAULT_MAX_ITER) -> Step1DResult:
    x, L, u, h = grid.x, grid.L, state.u, state.h
    N = grid.N
    dx = _checked_spacing(grid)
    Du, Dh = _D(u, dx), _D(h, dx)

    def split(q):
        return q[:N], q[N:2 * N], q[2 * N:]

    def update(q):
        xh, uh_, hh_ = split(q)
        dxh = _spacing(xh, L)
        return np.concatenate([
            x + 0.5 * tau * (u + uh_),
            u - 0.5 * tau * (Dh + _D(hh_, dxh)),
            h - 0.5 * tau * (h * Du + hh_ * _D(uh_, dxh)),
        ])

    def residual(q):
        xh, uh_, hh_ = split(q)
        dxh = _spacing(xh, L)
        return max(
            np.max(np.abs(xh - x - 0.5 * tau * (u + uh_))),
            np.max(np.abs(uh_ - u + 0.5 * tau * (Dh + _D(hh_, dxh)))),
            np.max(np.abs(hh_ - h + 0.5 * tau * (h * Du + hh_ * _D(uh_, dxh)))),
        )

    q0 = np.concatenate([x + tau * u, u, h])
    q, its, r = picard_solve(update, residual, q0, tol, max_iter)
    return _finish(grid, *split(q), its, r)


# -- Lagrangian momentum form ----------------------------------------------------

def step_conservative_explicit(grid: Grid1D, state: State1D, tau: float) -> Step1DResult:
    u, h = state.u, state.h
    dx = _checked_spacing(grid)
    _cfl_warning(grid, state, tau, 0.0)
    x_hat = grid.x + tau * u
    ratio = _spacing(x_hat, grid.L) / dx
    h_hat = h / ratio
    u_hat = (u * h - 0.5 * tau * _D(h * h, dx)) / (h_hat * ratio)
    return _finish(grid, x_hat, u_hat, h_hat)


def residual_conservative_lagrangian(grid: Grid1D, hat_grid: Grid1D, state: State1D,
                                     hat_state: State1D, tau: float,
                                     mode: str = "trapezoidal") -> dict[str, np.ndarray]:
    """Update-form residuals of the momentum-form Lagrangian schemes.

    Keys ``x`` (mesh equation), ``h`` (continuity) and ``u`` (momentum).
    """
    u, h, uh_, hh_ = state.u, state.h, hat_state.u, hat_state.h
    dx = _spacing(grid.x, grid.L)
    dxh = _spacing(hat_grid.x, grid.L)
    ratio = dxh / dx
    if mode == "explicit":
        rx = hat_grid.x - grid.x - tau * u
        pressure = 0.5 * tau * _D(h * h, dx)
    elif mode == "trapezoidal":
        rx = hat_grid.x - grid.x - 0.5 * tau * (u + uh_)
        pressure = 0.25 * tau * (_D(h * h, dx) + _D(hh_ * hh_, dxh))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return {
        "x": rx,
        "h": hh_ * ratio - h,
        "u": uh_ * hh_ * ratio - u * h + pressure,
    }


def step_conservative_trapezoidal(grid: Grid1D, state: State1D, tau: float,
                                  tol: float = DEFAULT_TOL,
                                  max_iter: int = DEFAULT_MAX_ITER) -> Step1DResult:
    x, L, u, h = grid.x, grid.L, state.u, state.h
    N = grid.N
    dx = _checked_spacing(grid)
    mass = h * dx
    mom = u * h
    Dh2 = _D(h * h, dx)

    def split(q):
        return q[:N], q[N:2 * N], q[2 * N:]

    def update(q):
        xh, uh_, hh_ = split(q)
        x_new = x + 0.5 * tau * (u + uh_)
        dxh = _spacing(x_new, L)
        ratio = dxh / dx
        h_new = mass / dxh
        u_new = (mom - 0.25 * tau * (Dh2 + _D(h_new * h_new, dxh))) / (h_new * ratio)
        return np.concatenate([x_new, u_new, h_new])

    def residual(q):
        xh, uh_, hh_ = split(q)
        dxh = _spacing(xh, L)
        ratio = dxh / dx
        return max(
            np.max(np.abs(xh - x - 0.5 * tau * (u + uh_))),
            np.max(np.abs(hh_ * ratio - h)),
            np.max(np.abs(uh_ * hh_ * ratio - mom + 0.25 * tau * (Dh2 + _D(hh_ * hh_, dxh)))),
        )

    q0 = np.concatenate([x + tau * u, u, h])
    q, its, r = picard_solve(update, residual, q0, tol, max_iter)
    return _finish(grid, *split(q), its, r)


# -- computational coordinates -------------------------------------------------

def _hat_grid_from_velocity(grid: Grid1D, tau: float, w) -> tuple[np.ndarray, np.ndarray]:
    w = np.asarray(w, dtype=float)
    if w.shape != grid.x.shape:
        raise ValueError("mesh velocity must have one value per node")
    return w, grid.x + tau * w


def step_computational_nonconservative(grid: Grid1D, state: State1D, tau: float, mesh_velocity,
                                       mode: str = "trapezoidal", tol: float = DEFAULT_TOL,
                                       max_iter: int = DEFAULT_MAX_ITER) -> Step1DResult:
    """Primitive-form step on a mesh moving with the given nodal velocity."""
    u, h = state.u, state.h
    N = grid.N
    w, x_hat = _hat_grid_from_velocity(grid, tau, mesh_velocity)
    dx = _checked_spacing(grid)
    Du, Dh = _D(u, dx), _D(h, dx)
    if mode == "explicit":
        _cfl_warning(grid, state, tau, u - w)
        u_hat = u - tau * ((u - w) * Du + Dh)
        h_hat = h - tau * ((u - w) * Dh + h * Du)
        return _finish(grid, x_hat, u_hat, h_hat)
    if mode != "trapezoidal":
        raise ValueError(f"unknown mode {mode!r}")
    dxh = _spacing(x_hat, grid.L)
    if not np.all(dxh != 0):
        raise TangledMeshError("degenerate stencil on the new mesh")

    def rhs(uh_, hh_):
        Duh, Dhh = _D(uh_, dxh), _D(hh_, dxh)
        rel = 0.5 * (u + uh_) - w
        ru = 0.5 * rel * (Du + Duh) + 0.5 * (Dh + Dhh)
        rh = 0.5 * rel * (Dh + Dhh) + 0.5 * (h * Du + hh_ * Duh)
        return ru, rh

    def update(q):
        ru, rh = rhs(q[:N], q[N:])
        return np.concatenate([u - tau * ru, h - tau * rh])

    def residual(q):
        ru, rh = rhs(q[:N], q[N:])
        return max(np.max(np.abs(q[:N] - u + tau * ru)), np.max(np.abs(q[N:] - h + tau * rh)))

    q, its, r = picard_solve(update, residual, np.concatenate([u, h]), tol, max_iter)
    return _finish(grid, x_hat, q[:N], q[N:], its, r)


def residual_conservative_computational(grid: Grid1D, hat_grid: Grid1D, state: State1D,
                                        hat_state: State1D, tau: float,
                                        mode: str = "trapezoidal") -> dict[str, np.ndarray]:
    """Update-form residuals (``h``: continuity, ``u``: momentum) of the
    conservative computational-coordinate schemes. The mesh velocity is
    implied by the two grids.
    """
    u, h, uh_, hh_ = state.u, state.h, hat_state.u, hat_state.h
    w = mesh_velocity(grid, hat_grid, tau)
    dx = _spacing(grid.x, grid.L)
    dxh = _spacing(hat_grid.x, grid.L)
    ratio = dxh / dx
    if mode == "explicit":
        fh = tau * _A(h, u, w, dx)
        fu = tau * _A(u * h, u, w, dx) + 0.5 * tau * _D(h * h, dx)
    elif mode == "trapezoidal":
        fh = 0.5 * tau * (_A(h, u, w, dx) + _A(hh_, uh_, w, dxh))
        fu = (0.5 * tau * (_A(u * h, u, w, dx) + _A(uh_ * hh_, uh_, w, dxh))
              + 0.25 * tau * (_D(h * h, dx) + _D(hh_ * hh_, dxh)))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return {"h": hh_ * ratio - h + fh, "u": uh_ * hh_ * ratio - u * h + fu}


def step_computational_conservative(grid: Grid1D, state: State1D, tau: float, mesh_velocity,
                                    mode: str = "trapezoidal", tol: float = DEFAULT_TOL,
                                    max_iter: int = DEFAULT_MAX_ITER) -> Step1DResult:
    """Momentum-form step on a mesh moving with the given nodal velocity."""
    u, h = state.u, state.h
    N = grid.N
    w, x_hat = _hat_grid_from_velocity(grid, tau, mesh_velocity)
    dx = _checked_spacing(grid)
    dxh = _spacing(x_hat, grid.L)
    if not np.all(dxh != 0):
        raise TangledMeshError("degenerate stencil on the new mesh")
    ratio = dxh / dx
    Ah, Auh, Dh2 = _A(h, u, w, dx), _A(u * h, u, w, dx), _D(h * h, dx)
    if mode == "explicit":
        _cfl_warning(grid, state, tau, u - w)
        h_hat = (h - tau * Ah) / ratio
        m_hat = (u * h - tau * Auh - 0.5 * tau * Dh2) / ratio
        return _finish(grid, x_hat, m_hat / h_hat, h_hat)
    if mode != "trapezoidal":
        raise ValueError(f"unknown mode {mode!r}")

    def update(q):
        uh_, hh_ = q[:N], q[N:]
        h_new = (h - 0.5 * tau * (Ah + _A(hh_, uh_, w, dxh))) / ratio
        m_new = (u * h - 0.5 * tau * (Auh + _A(uh_ * hh_, uh_, w, dxh))
                 - 0.25 * tau * (Dh2 + _D(hh_ * hh_, dxh))) / ratio
        return np.concatenate([m_new / h_new, h_new])

    def residual(q):
        uh_, hh_ = q[:N], q[N:]
        rh = hh_ * ratio - h + 0.5 * tau * (Ah + _A(hh_, uh_, w, dxh))
        ru = (uh_ * hh_ * ratio - u * h + 0.5 * tau * (Auh + _A(uh_ * hh_, uh_, w, dxh))
              + 0.25 * tau * (Dh2 + _D(hh_ * hh_, dxh)))
        return max(np.max(np.abs(rh)), np.max(np.abs(ru)))

    q, its, r = picard_solve(update, residual, np.concatenate([u, h]), tol, max_iter)
    return _finish(grid, x_hat, q[:N], q[N:], its, r)
