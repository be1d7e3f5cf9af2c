"""Finite symmetry transformations, difference invariants and equivariance checks.

1D group elements combine time/space shifts, a Galilean boost and the two
scalings ``t d/dt + x d/dx`` (exponent ``a``) and ``x d/dx + u d/du + 2h d/dh``
(exponent ``b``). They act in a fixed order: scaling b, scaling a, boost,
space shift, time shift. 2D elements carry shifts and boost components only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Grid1D, Grid2D, State1D, State2D, TangledMeshError, shift_1d


@dataclass(frozen=True)
class GroupElement1D:
    dt: float = 0.0
    dx: float = 0.0
    eps: float = 0.0
    a: float = 0.0
    b: float = 0.0

    def is_identity(self) -> bool:
        return self == GroupElement1D()


@dataclass(frozen=True)
class GroupElement2D:
    dt: float = 0.0
    dx: float = 0.0
    dy: float = 0.0
    eps1: float = 0.0
    eps2: float = 0.0

    def is_identity(self) -> bool:
        return self == GroupElement2D()


def compose_1d(g2: GroupElement1D, g1: GroupElement1D) -> GroupElement1D:
    """Element acting as ``g1`` followed by ``g2``."""
    ea2 = math.exp(g2.a)
    return GroupElement1D(
        dt=ea2 * g1.dt + g2.dt,
        dx=math.exp(g2.a + g2.b) * g1.dx + g2.eps * ea2 * g1.dt + g2.dx,
        eps=math.exp(g2.b) * g1.eps + g2.eps,
        a=g1.a + g2.a,
        b=g1.b + g2.b,
    )


def compose_2d(g2: GroupElement2D, g1: GroupElement2D) -> GroupElement2D:
    return GroupElement2D(
        dt=g1.dt + g2.dt,
        dx=g1.dx + g2.dx + g2.eps1 * g1.dt,
        dy=g1.dy + g2.dy + g2.eps2 * g1.dt,
        eps1=g1.eps1 + g2.eps1,
        eps2=g1.eps2 + g2.eps2,
    )


def time_scale(g) -> float:
    """Factor multiplying time intervals (and therefore the time step)."""
    return math.exp(g.a) if isinstance(g, GroupElement1D) else 1.0


def act_1d(g: GroupElement1D, t: float, grid: Grid1D, state: State1D):
    if g.is_identity():
        return t, grid, state
    sx, st, su = math.exp(g.a + g.b), math.exp(g.a), math.exp(g.b)
    t1 = st * t
    x = sx * grid.x + g.eps * t1 + g.dx
    u = su * state.u + g.eps
    h = su * su * state.h
    return t1 + g.dt, Grid1D(x, sx * grid.L), State1D(u, h)


def act_2d(g: GroupElement2D, t: float, grid: Grid2D, state: State2D):
    if g.is_identity():
        return t, grid, state
    x = grid.x + g.eps1 * t + g.dx
    y = grid.y + g.eps2 * t + g.dy
    return (t + g.dt, grid.with_positions(x, y),
            State2D(state.u + g.eps1, state.v + g.eps2, state.h))


def act(g, t, grid, state):
    if isinstance(g, GroupElement1D):
        return act_1d(g, t, grid, state)
    return act_2d(g, t, grid, state)


def transform_velocity(g, w):
    """Image of a nodal velocity field (mesh velocity, mean flow) under ``g``."""
    if isinstance(g, GroupElement1D):
        return math.exp(g.b) * np.asarray(w) + g.eps
    raise TypeError("use transform_velocity_2d for 2D elements")


@dataclass(frozen=True)
class InvariantSet1D:
    values: tuple

    def __getitem__(self, k: int) -> float:
        return self.values[k]

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


def difference_invariants_1d(grid: Grid1D, hat_grid: Grid1D, state: State1D,
                             hat_state: State1D, tau: float, i: int) -> InvariantSet1D:
    """The twelve invariants I0..I11 of the explicit and trapezoidal stencils at node i."""
    N = grid.N
    i = i % N
    xm, x0, xp = (shift_1d(grid.x, d, grid.L)[i] for d in (-1, 0, 1))
    Xm, X0, Xp = (shift_1d(hat_grid.x, d, hat_grid.L)[i] for d in (-1, 0, 1))
    if xp == xm or x0 == xm or Xp == Xm:
        raise TangledMeshError(f"degenerate stencil at node {i}", i)
    um, u0, up = (state.u[(i + d) % N] for d in (-1, 0, 1))
    hm, h0, hp = (state.h[(i + d) % N] for d in (-1, 0, 1))
    Um, U0, Up = (hat_state.u[(i + d) % N] for d in (-1, 0, 1))
    Hm, H0, Hp = (hat_state.h[(i + d) % N] for d in (-1, 0, 1))
    d = xp - xm
    dh = Xp - Xm
    xdot = (X0 - x0) / tau
    t2 = tau * tau / (d * d)
    return InvariantSet1D((
        (xp - x0) / (x0 - xm),
        (xdot - u0) * tau / d,
        (U0 - u0) * tau / d,
        (up - um) * tau / d,
        (up - u0) * tau / (xp - x0),
        hm * t2,
        h0 * t2,
        hp * t2,
        H0 * t2,
        (xdot - U0) * tau / d,
        (Up - Um) * tau / dh,
        (Hp - Hm) * tau * tau / (d * dh),
    ))


StepFn = Callable[[float, object, object, float], tuple]


def _max_rel(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / (1.0 + np.abs(b)))) if a.size else 0.0


def discrepancy(out_a, out_b) -> float:
    """Max over fields of |a - b| / (1 + |b|) for two ``(t, grid, state)`` triples."""
    _, ga, sa = out_a
    _, gb, sb = out_b
    if isinstance(ga, Grid1D):
        pairs = [(ga.x, gb.x), (sa.u, sb.u), (sa.h, sb.h), ([ga.L], [gb.L])]
    else:
        pairs = [(ga.x, gb.x), (ga.y, gb.y), (sa.u, sb.u), (sa.v, sb.v), (sa.h, sb.h)]
    return max(_max_rel(a, b) for a, b in pairs)


def check_equivariance(step: StepFn, g, t: float, grid, state, tau: float, n_steps: int = 1,
                       transformed_step: StepFn | None = None) -> float:
    """Two-path discrepancy between transform-then-step and step-then-transform.

    ``step(t, grid, state, tau)`` returns ``(grid_hat, state_hat)``. The
    transformed path runs ``transformed_step`` (default ``step``) with the
    time step scaled by the element. Errors raised by either path propagate.
    """
    other = step if transformed_step is None else transformed_step
    tau_g = time_scale(g) * tau

    tg, gg, sg = act(g, t, grid, state)
    tt, gt, st = t, grid, state
    for _ in range(n_steps):
        gg, sg = other(tg, gg, sg, tau_g)
        tg = tg + tau_g
        gt, st = step(tt, gt, st, tau)
        tt = tt + tau
    return discrepancy((tg, gg, sg), act(g, tt, gt, st))
