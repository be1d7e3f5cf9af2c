"""Periodic equidistribution mesh generator for 1D runs.

The monitor is evaluated from the current state with difference quotients
that only involve differences of positions and of ``u``, so it is unchanged
by shifts and Galilean boosts. The discrete equidistribution relation

    (rho_{i+1} + rho_i)(X_{i+1} - X_i) - (rho_i + rho_{i-1})(X_i - X_{i-1}) = 0

determines the new positions ``X`` up to a common shift. The shift is fixed
by ``mean(X - x) = tau * anchor``; with ``anchor = mean(u)`` the gauge moves
along with boosts, shifts and both scalings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import ConvergenceError, Grid1D, State1D, TangledMeshError, validate_grid
from .swe1d import mesh_velocity  # noqa: F401  (re-exported)

MONITOR_KINDS = ("arc_length_u", "arc_length_h", "arc_length_uh",
                 "curvature_u", "curvature_h", "curvature_uh", "constant")


@dataclass(frozen=True)
class MonitorSpec:
    kind: str = "arc_length_u"
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in MONITOR_KINDS:
            raise ValueError(f"unknown monitor kind {self.kind!r}")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("monitor constants must be nonnegative")

    def transformed(self, a: float = 0.0, b: float = 0.0) -> "MonitorSpec":
        """Equivalent spec after the scalings with exponents ``a`` and ``b``.

        Shifts and boosts leave every monitor unchanged; the scalings multiply
        the underlying derivative by a known power and are absorbed by
        rescaling the constants.
        """
        # factor by which each derivative is multiplied under the scalings
        fu, fh = {
            "arc_length_u": (math.exp(-a), 1.0),
            "arc_length_h": (1.0, math.exp(b - a)),
            "arc_length_uh": (math.exp(-a), math.exp(b - a)),
            "curvature_u": (math.exp(-2 * a - b), 1.0),
            "curvature_h": (1.0, math.exp(-2 * a)),
            "curvature_uh": (math.exp(-2 * a - b), math.exp(-2 * a)),
            "constant": (1.0, 1.0),
        }[self.kind]
        if self.kind.endswith("_h"):
            return replace(self, alpha=self.alpha / fh**2)
        return replace(self, alpha=self.alpha / fu**2, beta=self.beta / fh**2)


def _first_quotient(z, x, L):
    zm, zp = np.roll(z, 1), np.roll(z, -1)
    xm, xp = np.roll(x, 1), np.roll(x, -1)
    xm[0] -= L
    xp[-1] += L
    return (zp - zm) / (xp - xm)


def _second_quotient(z, x, L):
    zm, zp = np.roll(z, 1), np.roll(z, -1)
    xm, xp = np.roll(x, 1), np.roll(x, -1)
    xm[0] -= L
    xp[-1] += L
    return 2.0 * ((zp - z) / (xp - x) - (z - zm) / (x - xm)) / (xp - xm)


def monitor_values(grid: Grid1D, state: State1D, spec: MonitorSpec) -> np.ndarray:
    """Nodal monitor values rho_i for the requested kind."""
    if spec.kind == "constant":
        return np.ones(grid.N)
    if validate_grid(grid):
        raise TangledMeshError("monitor requested on a tangled grid")
    q = _first_quotient if spec.kind.startswith("arc_length") else _second_quotient
    x, L = grid.x, grid.L
    if spec.kind.endswith("_uh"):
        return np.sqrt(1.0 + spec.alpha * q(state.u, x, L) ** 2
                       + spec.beta * q(state.h, x, L) ** 2)
    z = state.h if spec.kind.endswith("_h") else state.u
    return np.sqrt(1.0 + spec.alpha * q(z, x, L) ** 2)


def equidistribution_residual(hat_grid: Grid1D, rho) -> np.ndarray:
    """Residual of the discrete equidistribution relation at every node, wrap rows included."""
    rho = np.asarray(rho, dtype=float)
    X, L = hat_grid.x, hat_grid.L
    gap = np.diff(np.append(X, X[0] + L))         # X_{i+1} - X_i
    flux = (np.roll(rho, -1) + rho) * gap          # lives on edge i+1/2
    return flux - np.roll(flux, 1)


def _gauge(X, x, anchor, tau):
    return X + (np.mean(x) + tau * anchor - np.mean(X))


def _gauss_seidel(grid: Grid1D, rho, anchor, tau, tol, max_iter):
    x, L, N = grid.x, grid.L, grid.N
    X = x.copy().tolist()
    r = [float(v) for v in rho]
    wp = [r[(i + 1) % N] + r[i] for i in range(N)]   # weight of edge i+1/2
    for sweep in range(1, max_iter + 1):
        for i in range(N):
            right = X[i + 1] if i < N - 1 else X[0] + L
            left = X[i - 1] if i > 0 else X[N - 1] - L
            wl = wp[i - 1]
            X[i] = (wp[i] * right + wl * left) / (wp[i] + wl)
        Xa = np.asarray(X)
        res = np.max(np.abs(equidistribution_residual(Grid1D(Xa, L), rho)))
        if res <= tol:
            return _gauge(Xa, x, anchor, tau), sweep, res
    raise ConvergenceError(
        f"Gauss-Seidel equidistribution did not converge in {max_iter} sweeps", res, max_iter)


def _direct(grid: Grid1D, rho, anchor, tau):
    # periodic constant-flux form: (rho_{i+1} + rho_i)(X_{i+1} - X_i) is the same on every edge
    rho = np.asarray(rho, dtype=float)
    c = 1.0 / (np.roll(rho, -1) + rho)
    gaps = grid.L * c / np.sum(c)
    X = np.concatenate([[0.0], np.cumsum(gaps[:-1])])
    return _gauge(X, grid.x, anchor, tau)


def solve_equidistribution(grid: Grid1D, rho, anchor: float, tau: float, tol: float = 1e-12,
                           max_iter: int | None = None, method: str = "direct") -> Grid1D:
    """Next-level grid equidistributing ``rho``.

    ``method="direct"`` uses the closed-form constant-flux solution of the
    periodic relation; ``method="gauss_seidel"`` runs lexicographic sweeps
    from the current grid. Both are checked against ``tol``.
    """
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (grid.N,) or not np.all(rho > 0):
        raise ValueError("monitor values must be positive, one per node")
    if method == "direct":
        X = _direct(grid, rho, anchor, tau)
        res = float(np.max(np.abs(equidistribution_residual(Grid1D(X, grid.L), rho))))
        if res > tol:
            raise ConvergenceError(f"equidistribution residual {res:.3e} above tolerance", res, 1)
    elif method == "gauss_seidel":
        X, _, _ = _gauss_seidel(grid, rho, anchor, tau, tol,
                                10 * grid.N**2 if max_iter is None else max_iter)
    else:
        raise ValueError(f"unknown method {method!r}")
    out = Grid1D(X, grid.L)
    bad = validate_grid(out)
    if bad:
        raise TangledMeshError(f"equidistributed grid tangled at node {bad[0]}", bad[0])
    return out


def adapted_mesh_velocity(grid: Grid1D, state: State1D, spec: MonitorSpec, tau: float,
                          tol: float = 1e-12, method: str = "direct") -> np.ndarray:
    """Mesh velocity that carries ``grid`` onto the mesh equidistributing the current state."""
    rho = monitor_values(grid, state, spec)
    hat = solve_equidistribution(grid, rho, float(np.mean(state.u)), tau, tol, method=method)
    return (hat.x - grid.x) / tau
