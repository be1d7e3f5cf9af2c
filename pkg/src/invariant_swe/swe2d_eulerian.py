"""Conservative trapezoidal scheme in computational coordinates on a moving 2D mesh.

The momentum form is written on the fixed logical lattice (xi, eta). Metric
products live on lattice faces: ``(J xi_x), (J xi_y), (J xi_t)`` at (j+1/2, k),
``(J eta_x), (J eta_y), (J eta_t)`` at (j, k+1/2). A face array indexed by j
holds the value at j+1/2, so the value at j-1/2 is the same array shifted by
one. Every flux difference therefore telescopes over the periodic lattice and
mass and both momenta are conserved up to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Grid2D,
    PositivityError,
    State2D,
    TangledMeshError,
    jacobian_2d,
    picard_solve,
    shift_2d,
)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 200


@dataclass(frozen=True)
class FaceMetrics:
    """Geometry of one time level: J at nodes and the four face products."""
    J: np.ndarray
    xi_x: np.ndarray   # (J xi_x) at j+1/2
    xi_y: np.ndarray   # (J xi_y) at j+1/2
    eta_x: np.ndarray  # (J eta_x) at k+1/2
    eta_y: np.ndarray  # (J eta_y) at k+1/2


@dataclass(frozen=True)
class MetricTerms:
    level: FaceMetrics
    hat: FaceMetrics
    xi_t: np.ndarray       # (J xi_t) at j+1/2
    eta_t: np.ndarray      # (J eta_t) at k+1/2
    hat_xi_t: np.ndarray
    hat_eta_t: np.ndarray
    xdot: np.ndarray
    ydot: np.ndarray

    @property
    def J(self):
        return self.level.J

    @property
    def hat_J(self):
        return self.hat.J


@dataclass(frozen=True)
class FluxVectors:
    Ft: np.ndarray  # (3, Nx, Ny): h, hu, hv
    Fx: np.ndarray
    Fy: np.ndarray

    @classmethod
    def from_state(cls, state: State2D) -> "FluxVectors":
        h, u, v = state.h, state.u, state.v
        hu, hv = h * u, h * v
        return cls(
            Ft=np.stack([h, hu, hv]),
            Fx=np.stack([hu, hu * u + 0.5 * h * h, hu * v]),
            Fy=np.stack([hv, hu * v, hv * v + 0.5 * h * h]),
        )

    @classmethod
    def from_conserved(cls, Ft: np.ndarray) -> "FluxVectors":
        h = Ft[0]
        return cls.from_state(State2D(Ft[1] / h, Ft[2] / h, h))


def face_metrics(grid: Grid2D) -> FaceMetrics:
    Lx, Ly = grid.Lx, grid.Ly
    # eta-central differences at nodes, then averaged onto j+1/2
    dx_eta = shift_2d(grid.x, 0, 1) - shift_2d(grid.x, 0, -1)
    dy_eta = shift_2d(grid.y, 0, 1, 0.0, Ly) - shift_2d(grid.y, 0, -1, 0.0, Ly)
    dx_xi = shift_2d(grid.x, 1, 0, Lx) - shift_2d(grid.x, -1, 0, Lx)
    dy_xi = shift_2d(grid.y, 1, 0) - shift_2d(grid.y, -1, 0)
    q = 0.25 / grid.deta
    p = 0.25 / grid.dxi
    J = jacobian_2d(grid)
    return FaceMetrics(
        J=J,
        xi_x=q * (dy_eta + shift_2d(dy_eta, 1, 0)),
        xi_y=-q * (dx_eta + shift_2d(dx_eta, 1, 0)),
        eta_x=-p * (dy_xi + shift_2d(dy_xi, 0, 1)),
        eta_y=p * (dx_xi + shift_2d(dx_xi, 0, 1)),
    )


def _time_metrics(m: FaceMetrics, xdot, ydot):
    xe, ye = xdot + shift_2d(xdot, 1, 0), ydot + shift_2d(ydot, 1, 0)
    xn, yn = xdot + shift_2d(xdot, 0, 1), ydot + shift_2d(ydot, 0, 1)
    return -0.5 * (m.xi_x * xe + m.xi_y * ye), -0.5 * (m.eta_x * xn + m.eta_y * yn)


def metric_terms(grid: Grid2D, hat_grid: Grid2D, tau: float) -> MetricTerms:
    """Metric products of both time levels; the hatted level keeps the same mesh velocity."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    level = face_metrics(grid)
    hat = face_metrics(hat_grid)
    for name, m in (("current", level), ("new", hat)):
        if not np.all(m.J > 0):
            j, k = (int(c[0]) for c in np.nonzero(~(m.J > 0)))
            raise TangledMeshError(f"nonpositive Jacobian on the {name} grid at ({j}, {k})", (j, k))
    xdot = (hat_grid.x - grid.x) / tau
    ydot = (hat_grid.y - grid.y) / tau
    xi_t, eta_t = _time_metrics(level, xdot, ydot)
    hxi_t, heta_t = _time_metrics(hat, xdot, ydot)
    return MetricTerms(level, hat, xi_t, eta_t, hxi_t, heta_t, xdot, ydot)


def _assemble(m: FaceMetrics, xi_t, eta_t, flux: FluxVectors, dxi: float, deta: float):
    def east(F):
        return F + shift_2d_stack(F, 1, 0)

    def north(F):
        return F + shift_2d_stack(F, 0, 1)

    phi_xi = xi_t * east(flux.Ft) + m.xi_x * east(flux.Fx) + m.xi_y * east(flux.Fy)
    phi_eta = eta_t * north(flux.Ft) + m.eta_x * north(flux.Fx) + m.eta_y * north(flux.Fy)
    U = (phi_xi - shift_2d_stack(phi_xi, -1, 0)) / (2 * dxi)
    V = (phi_eta - shift_2d_stack(phi_eta, 0, -1)) / (2 * deta)
    return U, V


def shift_2d_stack(F: np.ndarray, dj: int, dk: int) -> np.ndarray:
    """Periodic shift of a (components, Nx, Ny) stack."""
    return np.roll(F, (-dj, -dk), axis=(1, 2))


def assemble_UV(metric: MetricTerms, flux: FluxVectors, dxi: float, deta: float,
                hatted: bool = False):
    """Face-flux differences ``U_jk`` and ``V_jk``, each of shape (3, Nx, Ny)."""
    if hatted:
        return _assemble(metric.hat, metric.hat_xi_t, metric.hat_eta_t, flux, dxi, deta)
    return _assemble(metric.level, metric.xi_t, metric.eta_t, flux, dxi, deta)


def scheme_residual(grid: Grid2D, hat_grid: Grid2D, state: State2D, hat_state: State2D,
                    tau: float) -> np.ndarray:
    """Left-hand side of the trapezoidal scheme for (h, hu, hv), shape (3, Nx, Ny)."""
    metric = metric_terms(grid, hat_grid, tau)
    f = FluxVectors.from_state(state)
    fh = FluxVectors.from_state(hat_state)
    U, V = assemble_UV(metric, f, grid.dxi, grid.deta)
    Uh, Vh = assemble_UV(metric, fh, grid.dxi, grid.deta, hatted=True)
    return ((metric.hat_J * fh.Ft - metric.J * f.Ft) / tau
            + 0.5 * (U + Uh) + 0.5 * (V + Vh))


def step_eulerian_trapezoidal(grid: Grid2D, hat_grid: Grid2D, state: State2D, tau: float,
                              tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                              return_info: bool = False):
    """Advance the state from ``grid`` to the prescribed ``hat_grid``.

    Picard iteration on the conserved vector of the new level. The residual is
    the scheme in update form (multiplied by tau) divided by max |J F^t|.
    """
    metric = metric_terms(grid, hat_grid, tau)
    dxi, deta = grid.dxi, grid.deta
    f = FluxVectors.from_state(state)
    U, V = assemble_UV(metric, f, dxi, deta)
    JF = metric.J * f.Ft
    explicit = JF - 0.5 * tau * (U + V)
    scale = float(np.max(np.abs(JF)))
    shape = f.Ft.shape

    def fluxes(q):
        Ft = q.reshape(shape)
        if not np.all(Ft[0] > 0):
            j, k = (int(c[0]) for c in np.nonzero(~(Ft[0] > 0)))
            raise PositivityError(f"nonpositive depth at ({j}, {k})", (j, k))
        fh = FluxVectors.from_conserved(Ft)
        Uh, Vh = assemble_UV(metric, fh, dxi, deta, hatted=True)
        return Ft, Uh + Vh

    def update(q):
        _, S = fluxes(q)
        return ((explicit - 0.5 * tau * S) / metric.hat_J).ravel()

    def residual(q):
        Ft, S = fluxes(q)
        return float(np.max(np.abs(metric.hat_J * Ft - explicit + 0.5 * tau * S))) / scale

    q0 = (JF / metric.hat_J).ravel()
    q, its, r = picard_solve(update, residual, q0, tol, max_iter)
    Ft = q.reshape(shape)
    if not np.all(Ft[0] > 0):
        raise PositivityError("nonpositive depth after the step")
    new_state = State2D(Ft[1] / Ft[0], Ft[2] / Ft[0], Ft[0])
    if return_info:
        return new_state, its, r
    return new_state

