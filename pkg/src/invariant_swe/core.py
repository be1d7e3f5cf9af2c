"""Shared data model: periodic moving grids, collocated states, step bookkeeping.

All arrays are stored for one period only. Anything that needs a neighbour
across the periodic seam goes through :func:`ghost_position_1d` or the
shift helpers below, which add the domain length for every wrap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SchemeError(RuntimeError):
    """Base class for failures raised by a time step or a mesh solve."""


class TangledMeshError(SchemeError):
    def __init__(self, message: str, index=None):
        super().__init__(message)
        self.index = index


class PositivityError(SchemeError):
    def __init__(self, message: str, index=None):
        super().__init__(message)
        self.index = index


class ConvergenceError(SchemeError):
    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def _frozen(a, ndim: int | None = None) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Node positions of a periodic 1D moving mesh (one period stored)."""

    x: np.ndarray
    L: float

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(self.x, 1))
        object.__setattr__(self, "L", float(self.L))
        if self.x.size < 3:
            raise ValueError("a periodic grid needs at least 3 nodes")
        if not self.L > 0:
            raise ValueError("domain length must be positive")

    @property
    def N(self) -> int:
        return self.x.size

    @classmethod
    def uniform(cls, N: int, L: float = 2 * np.pi, x0: float = 0.0) -> "Grid1D":
        return cls(x0 + L * np.arange(N) / N, L)

    def neighbours(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (x_{i-1}, x_{i+1}) for every node with periodic offsets."""
        return shift_1d(self.x, -1, self.L), shift_1d(self.x, 1, self.L)

    def central_spacing(self) -> np.ndarray:
        """x_{i+1} - x_{i-1} with periodic wrap."""
        xm, xp = self.neighbours()
        return xp - xm


@dataclass(frozen=True, eq=False)
class State1D:
    u: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", _frozen(self.u, 1))
        object.__setattr__(self, "h", _frozen(self.h, 1))
        if self.u.shape != self.h.shape:
            raise ValueError("u and h must have the same length")

    @property
    def N(self) -> int:
        return self.u.size


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Doubly periodic curvilinear mesh; x[j, k], y[j, k] with j along xi, k along eta."""

    x: np.ndarray
    y: np.ndarray
    Lx: float
    Ly: float
    dxi: float = 1.0
    deta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(self.x, 2))
        object.__setattr__(self, "y", _frozen(self.y, 2))
        for name in ("Lx", "Ly", "dxi", "deta"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.x.shape != self.y.shape:
            raise ValueError("x and y must have the same shape")
        if min(self.x.shape) < 3:
            raise ValueError("a periodic grid needs at least 3 nodes per direction")
        if not (self.Lx > 0 and self.Ly > 0 and self.dxi > 0 and self.deta > 0):
            raise ValueError("domain lengths and computational steps must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return self.x.shape

    @classmethod
    def uniform(cls, Nx: int, Ny: int, Lx: float = 2 * np.pi, Ly: float = 2 * np.pi,
                dxi: float | None = None, deta: float | None = None) -> "Grid2D":
        xs = Lx * np.arange(Nx) / Nx
        ys = Ly * np.arange(Ny) / Ny
        x, y = np.meshgrid(xs, ys, indexing="ij")
        return cls(x, y, Lx, Ly,
                   1.0 / Nx if dxi is None else dxi,
                   1.0 / Ny if deta is None else deta)

    def with_positions(self, x, y) -> "Grid2D":
        return Grid2D(x, y, self.Lx, self.Ly, self.dxi, self.deta)

    def shifted(self, dj: int, dk: int) -> tuple[np.ndarray, np.ndarray]:
        """Positions of node (j+dj, k+dk) for every (j, k), seam offsets applied."""
        return shift_2d(self.x, dj, dk, self.Lx, 0.0), shift_2d(self.y, dj, dk, 0.0, self.Ly)


@dataclass(frozen=True, eq=False)
class State2D:
    u: np.ndarray
    v: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        for name in ("u", "v", "h"):
            object.__setattr__(self, name, _frozen(getattr(self, name), 2))
        if not (self.u.shape == self.v.shape == self.h.shape):
            raise ValueError("u, v, h must share one shape")


@dataclass(frozen=True)
class StepSpec:
    tau: float
    t: float = 0.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("time step must be positive")

    def advanced(self) -> "StepSpec":
        return StepSpec(self.tau, self.t + self.tau)


def periodic_index(i: int, N: int) -> tuple[int, int]:
    """Return ``(i mod N, floor(i / N))``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    wrap, idx = divmod(int(i), int(N))
    return idx, wrap


def ghost_position_1d(grid: Grid1D, i: int) -> float:
    idx, wrap = periodic_index(i, grid.N)
    return float(grid.x[idx] + wrap * grid.L)


def shift_1d(a: np.ndarray, d: int, period: float = 0.0) -> np.ndarray:
    """Value at index i+d for every i; ``period`` is added once per forward wrap."""
    N = a.shape[0]
    out = np.roll(a, -d)
    if period != 0.0 and d != 0:
        idx = np.arange(N) + d
        out = out + np.floor_divide(idx, N) * period
    return out


def shift_2d(a: np.ndarray, dj: int, dk: int, period_j: float = 0.0,
             period_k: float = 0.0) -> np.ndarray:
    """Value at (j+dj, k+dk); seam offsets ``period_j``/``period_k`` per wrap."""
    Nj, Nk = a.shape
    out = np.roll(a, (-dj, -dk), axis=(0, 1))
    if period_j != 0.0 and dj != 0:
        out = out + (np.floor_divide(np.arange(Nj) + dj, Nj) * period_j)[:, None]
    if period_k != 0.0 and dk != 0:
        out = out + (np.floor_divide(np.arange(Nk) + dk, Nk) * period_k)[None, :]
    return out


def jacobian_2d(grid: Grid2D) -> np.ndarray:
    """Central-difference Jacobian x_xi*y_eta - x_eta*y_xi at every node."""
    xe, ye = grid.shifted(1, 0)
    xw, yw = grid.shifted(-1, 0)
    xn, yn = grid.shifted(0, 1)
    xs, ys = grid.shifted(0, -1)
    return ((xe - xw) * (yn - ys) - (xn - xs) * (ye - yw)) / (4.0 * grid.dxi * grid.deta)


def validate_grid(grid: Grid1D | Grid2D) -> list:
    """Indices of monotonicity violations (1D) or nonpositive-Jacobian nodes (2D).

    An empty list means the grid is valid.
    """
    if isinstance(grid, Grid1D):
        x = grid.x
        bad = [int(i) for i in np.nonzero(~(x[1:] > x[:-1]))[0]]
        if not (x[0] + grid.L > x[-1]):
            bad.append(grid.N - 1)
        return bad
    J = jacobian_2d(grid)
    return [(int(j), int(k)) for j, k in zip(*np.nonzero(~(J > 0)))]


def check_step_output_1d(grid: Grid1D, state: State1D) -> None:
    bad = validate_grid(grid)
    if bad:
        raise TangledMeshError(f"grid tangled at node {bad[0]}", bad[0])
    nonpos = np.nonzero(~(state.h > 0))[0]
    if nonpos.size:
        i = int(nonpos[0])
        raise PositivityError(f"nonpositive depth h={state.h[i]!r} at node {i}", i)


def picard_solve(update, residual, q0: np.ndarray, tol: float, max_iter: int):
    """Damped fixed-point iteration ``q <- q + w (update(q) - q)``.

    ``residual(q)`` returns the max-norm scheme residual. The damping starts at
    1 and drops to 0.5 once the residual increases. Returns ``(q, iterations,
    residual)``.
    """
    q = q0
    r_prev = np.inf
    omega = 1.0
    for it in range(1, max_iter + 1):
        q_new = update(q)
        if omega != 1.0:
            q_new = q + omega * (q_new - q)
        r = residual(q_new)
        if not np.isfinite(r):
            raise ConvergenceError("fixed-point iteration diverged", r, it)
        if r > r_prev:
            omega = 0.5
        q, r_prev = q_new, r
        if r <= tol:
            return q, it, r
    raise ConvergenceError(
        f"no convergence after {max_iter} iterations (residual {r_prev:.3e})", r_prev, max_iter)
