"""Time loops, output files, equivariance suite and self-convergence studies."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import mesh1d, mesh2d, swe1d, swe2d_eulerian, swe2d_lagrangian
from .config import EXPLICIT_SCHEMES, SCHEMES_1D, SCHEMES_2D, SimulationConfig
from .core import Grid1D, Grid2D, SchemeError, State1D, State2D
from .diagnostics import (
    DiagnosticsRecord,
    conserved_1d,
    conserved_2d,
    csv_header,
    csv_row,
    relative_changes,
)
from .symmetry import GroupElement1D, GroupElement2D, check_equivariance

DIGITS_ENV = "INVARIANT_SWE_DIGITS"

Stepper = Callable[[float, object, object, float], tuple]


class RunFailure(RuntimeError):
    """A scheme error annotated with the simulation time at which it happened."""

    def __init__(self, t: float, step: int, cause: SchemeError):
        where = getattr(cause, "index", None)
        loc = f" at index {where}" if where is not None else ""
        super().__init__(f"step {step}, t={t:.6g}{loc}: {cause}")
        self.t = t
        self.step = step
        self.cause = cause


def output_digits() -> int:
    raw = os.environ.get(DIGITS_ENV, "17")
    try:
        d = int(raw)
    except ValueError:
        raise ValueError(f"{DIGITS_ENV} must be an integer, got {raw!r}") from None
    if not 1 <= d <= 17:
        raise ValueError(f"{DIGITS_ENV} must be between 1 and 17")
    return d


def _fmt(v, digits: int) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), f".{digits}g")


# initial data -----------------------------------------------------------------

def initial_1d(cfg: SimulationConfig) -> tuple[Grid1D, State1D]:
    grid = Grid1D.uniform(cfg.N, cfg.L)
    k = 2 * math.pi / cfg.L
    x = grid.x
    return grid, State1D(cfg.A * np.sin(k * x), cfg.h0 + cfg.A * np.sin(k * x + cfg.phi0))


def initial_2d(cfg: SimulationConfig) -> tuple[Grid2D, State2D]:
    grid = Grid2D.uniform(cfg.Nx, cfg.Ny, cfg.Lx, cfg.Ly)
    x = grid.x * (2 * math.pi / cfg.Lx)
    y = grid.y * (2 * math.pi / cfg.Ly)
    A, phi = cfg.A, cfg.phi0
    return grid, State2D(A * np.sin(x + phi) * np.sin(y), A * np.sin(x) * np.sin(y),
                         cfg.h0 + A * np.cos(x + phi) * np.cos(y))


def initial(cfg: SimulationConfig):
    return initial_2d(cfg) if cfg.is_2d else initial_1d(cfg)


# steppers ---------------------------------------------------------------------

def _prescribed_1d(cfg: SimulationConfig):
    xi = Grid1D.uniform(cfg.N, cfg.L).x
    k = 2 * math.pi / cfg.L

    def position(t):
        return xi + cfg.mesh_amp / k * math.sin(t) * np.sin(k * xi)

    return position


def _prescribed_2d(cfg: SimulationConfig):
    g = Grid2D.uniform(cfg.Nx, cfg.Ny, cfg.Lx, cfg.Ly)
    kx, ky = 2 * math.pi / cfg.Lx, 2 * math.pi / cfg.Ly
    X, Y = g.x, g.y

    def positions(t):
        s = cfg.mesh_amp * math.sin(t)
        return (X + s / kx * np.sin(ky * Y) * np.cos(kx * X),
                Y + s / ky * np.sin(kx * X + 1.0) * np.cos(ky * Y))

    return positions


def make_stepper(cfg: SimulationConfig, monitor: mesh1d.MonitorSpec | None = None) -> Stepper:
    """``step(t, grid, state, tau) -> (grid, state)`` for the configured scheme.

    ``monitor`` overrides the 1D monitor built from the config (used to run the
    scaled problem with correspondingly rescaled constants).
    """
    s = cfg.scheme
    tol, max_iter = cfg.tol, cfg.max_iter

    if s in SCHEMES_1D:
        if s.startswith("computational"):
            spec = monitor or mesh1d.MonitorSpec(cfg.monitor, cfg.alpha, cfg.beta)
            mode = "explicit" if s.endswith("explicit") else "trapezoidal"
            advance = (swe1d.step_computational_conservative if "conservative" in s
                       else swe1d.step_computational_nonconservative)
            position = _prescribed_1d(cfg) if cfg.mesh == "prescribed" else None

            def step(t, grid, state, tau):
                if cfg.mesh == "adaptive":
                    w = mesh1d.adapted_mesh_velocity(grid, state, spec, tau, tol=min(tol, 1e-12))
                elif cfg.mesh == "static":
                    w = np.zeros(grid.N)
                else:
                    w = (position(t + tau) - grid.x) / tau
                r = advance(grid, state, tau, w, mode=mode, tol=tol, max_iter=max_iter)
                return r.hat_grid, r.hat_state
            return step

        if s.endswith("explicit"):
            fn = getattr(swe1d, f"step_{s}")

            def step(t, grid, state, tau):
                r = fn(grid, state, tau)
                return r.hat_grid, r.hat_state
            return step

        fn = getattr(swe1d, f"step_{s}")

        def step(t, grid, state, tau):
            r = fn(grid, state, tau, tol=tol, max_iter=max_iter)
            return r.hat_grid, r.hat_state
        return step

    if s == "fv_explicit":
        return lambda t, grid, state, tau: swe2d_lagrangian.step_fv_explicit(
            grid, state, tau, interp=cfg.interp)
    if s == "fv_trapezoidal":
        return lambda t, grid, state, tau: swe2d_lagrangian.step_fv_trapezoidal(
            grid, state, tau, tol=tol, max_iter=max_iter, interp=cfg.interp)

    spec = mesh2d.WeightSpec(cfg.weight, cfg.weight_alpha, cfg.laplacian, cfg.smooth)
    positions = _prescribed_2d(cfg) if cfg.mesh == "prescribed" else None

    def step(t, grid, state, tau):
        if cfg.mesh == "adaptive":
            hat = mesh2d.adapted_grid(grid, state, spec, tau, tol=cfg.mesh_tol,
                                      relax=cfg.mesh_relax)
        elif cfg.mesh == "static":
            hat = grid
        else:
            hat = grid.with_positions(*positions(t + tau))
        new = swe2d_eulerian.step_eulerian_trapezoidal(grid, hat, state, tau, tol=tol,
                                                       max_iter=max_iter)
        return hat, new
    return step


# time loop ----------------------------------------------------------------------

@dataclass
class RunResult:
    t: float
    grid: object
    state: object
    records: list[DiagnosticsRecord] = field(default_factory=list)
    files: dict[str, Path] = field(default_factory=dict)

    @property
    def changes(self) -> list[dict[str, float]]:
        return [relative_changes(r, self.records[0]) for r in self.records[1:]]


def _diagnose(t, grid, state):
    return conserved_2d(grid, state, t) if isinstance(grid, Grid2D) else conserved_1d(grid, state, t)


def _snapshot_rows(t, grid, state):
    if isinstance(grid, Grid2D):
        Nx, Ny = grid.shape
        for j in range(Nx):
            for k in range(Ny):
                yield (t, j, k, grid.x[j, k], grid.y[j, k], state.u[j, k], state.v[j, k],
                       state.h[j, k])
    else:
        for i in range(grid.N):
            yield (t, i, grid.x[i], state.u[i], state.h[i])


def _mesh_rows(t, grid):
    if isinstance(grid, Grid2D):
        Nx, Ny = grid.shape
        for j in range(Nx):
            for k in range(Ny):
                yield (t, j, k, grid.x[j, k], grid.y[j, k])
    else:
        for i in range(grid.N):
            yield (t, i, grid.x[i])


class _Writers:
    def __init__(self, out: Path, is_2d: bool, snapshots: bool, digits: int):
        out.mkdir(parents=True, exist_ok=True)
        self.digits = digits
        self.files = {"diagnostics": out / "diagnostics.csv", "mesh": out / "mesh.csv"}
        if snapshots:
            self.files["snapshots"] = out / "snapshots.csv"
        self._handles = {k: open(p, "w", newline="") for k, p in self.files.items()}
        self._csv = {k: csv.writer(h) for k, h in self._handles.items()}
        self._csv["diagnostics"].writerow(csv_header(is_2d))
        self._csv["mesh"].writerow(["t", "j", "k", "x", "y"] if is_2d else ["t", "i", "x"])
        if snapshots:
            self._csv["snapshots"].writerow(
                ["t", "j", "k", "x", "y", "u", "v", "h"] if is_2d else ["t", "i", "x", "u", "h"])

    def write(self, name, rows):
        d = self.digits
        self._csv[name].writerows([_fmt(v, d) for v in row] for row in rows)

    def close(self):
        for h in self._handles.values():
            h.close()


def run(cfg: SimulationConfig, out_dir: str | Path | None = None,
        progress: Callable[[int, float], None] | None = None) -> RunResult:
    """Integrate from the initial data to ``t_final``.

    With ``out_dir`` the diagnostics, mesh-trajectory and (when
    ``snapshot_stride`` > 0, plus the first and last state) snapshot CSVs are
    written as the run proceeds, so a failed run leaves everything up to the
    failing step on disk. Scheme errors are re-raised as :class:`RunFailure`.
    """
    grid, state = initial(cfg)
    step = make_stepper(cfg)
    t = 0.0
    n_steps = cfg.n_steps
    ref = _diagnose(t, grid, state)
    records = [ref]
    writers = None
    if out_dir is not None:
        writers = _Writers(Path(out_dir), cfg.is_2d, cfg.snapshot_stride > 0, output_digits())
        writers.write("diagnostics", [csv_row(ref, ref)])
        writers.write("mesh", _mesh_rows(t, grid))
        if cfg.snapshot_stride > 0:
            writers.write("snapshots", _snapshot_rows(t, grid, state))
    try:
        for n in range(1, n_steps + 1):
            try:
                grid, state = step(t, grid, state, cfg.tau)
            except SchemeError as exc:
                raise RunFailure(t, n, exc) from exc
            t = n * cfg.tau
            last = n == n_steps
            if n % cfg.diag_stride == 0 or last:
                rec = _diagnose(t, grid, state)
                records.append(rec)
                if writers:
                    writers.write("diagnostics", [csv_row(rec, ref)])
            if writers:
                if n % cfg.mesh_stride == 0 or last:
                    writers.write("mesh", _mesh_rows(t, grid))
                if cfg.snapshot_stride > 0 and (n % cfg.snapshot_stride == 0 or last):
                    writers.write("snapshots", _snapshot_rows(t, grid, state))
            if progress:
                progress(n, t)
    finally:
        if writers:
            writers.close()
    return RunResult(t, grid, state, records, dict(writers.files) if writers else {})


# equivariance suite -----------------------------------------------------------------

GENERATORS_1D = {
    "time_shift": GroupElement1D(dt=0.5),
    "space_shift": GroupElement1D(dx=1.3),
    "boost": GroupElement1D(eps=0.7),
    "scaling_a": GroupElement1D(a=0.4),
    "scaling_b": GroupElement1D(b=-0.3),
    "composite": GroupElement1D(dt=0.2, dx=-0.9, eps=-0.35, a=-0.25, b=0.2),
}
GENERATORS_2D = {
    "time_shift": GroupElement2D(dt=0.5),
    "x_shift": GroupElement2D(dx=1.3),
    "y_shift": GroupElement2D(dy=-0.8),
    "boost_x": GroupElement2D(eps1=0.7),
    "boost_y": GroupElement2D(eps2=-0.4),
    "composite": GroupElement2D(dt=0.2, dx=-0.9, dy=0.4, eps1=-0.35, eps2=0.25),
}


def scheme_tolerance(cfg: SimulationConfig) -> float:
    """Acceptance bound for two-path discrepancies: ten times the solver tolerance."""
    base = cfg.tol
    if cfg.scheme == "eulerian_trapezoidal" and cfg.mesh == "adaptive":
        base = max(base, cfg.mesh_tol)
    return 10 * base


@dataclass(frozen=True)
class InvarianceRow:
    scheme: str
    generator: str
    n_steps: int
    discrepancy: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.discrepancy <= self.tolerance


def invariance_suite(cfg: SimulationConfig, schemes=None, steps=(1, 10),
                     generators=None) -> list[InvarianceRow]:
    """Two-path discrepancies for every (scheme, generator, step count)."""
    if schemes is None:
        schemes = list(SCHEMES_2D if cfg.is_2d else SCHEMES_1D)
    rows = []
    for scheme in schemes:
        c = cfg.with_values(scheme=scheme)
        gens = generators or (GENERATORS_2D if c.is_2d else GENERATORS_1D)
        grid, state = initial(c)
        step = make_stepper(c)
        for name, g in gens.items():
            other = None
            if not c.is_2d and (g.a or g.b):
                spec = mesh1d.MonitorSpec(c.monitor, c.alpha, c.beta).transformed(g.a, g.b)
                other = make_stepper(c, monitor=spec)
            for n in steps:
                d = check_equivariance(step, g, 0.0, grid, state, c.tau, n_steps=n,
                                       transformed_step=other)
                rows.append(InvarianceRow(scheme, name, n, d, scheme_tolerance(c)))
    return rows


# convergence --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceTable:
    kind: str
    parameters: list[float]
    differences: list[float]
    orders: list[float]

    @property
    def monotone(self) -> bool:
        return all(b < a for a, b in zip(self.differences, self.differences[1:]))

    @property
    def min_order(self) -> float:
        return min(self.orders)


def _fields(grid, state):
    if isinstance(grid, Grid2D):
        return [grid.x, grid.y, state.u, state.v, state.h]
    return [grid.x, state.u, state.h]


def _final(cfg: SimulationConfig):
    grid, state = initial(cfg)
    step = make_stepper(cfg)
    t = 0.0
    for n in range(1, cfg.n_steps + 1):
        grid, state = step(t, grid, state, cfg.tau)
        t = n * cfg.tau
    return grid, state


def convergence_study(cfg: SimulationConfig, levels: int = 3,
                      kind: str = "temporal") -> ConvergenceTable:
    """Richardson self-convergence in tau (halving) or in N (doubling, 1D only).

    Differences are max-norms between consecutive levels at ``t_final``; on
    refined grids only the nodes shared with the coarsest grid are compared.
    Observed orders are log2 of consecutive difference ratios.
    """
    if levels < 3:
        raise ValueError("a convergence study needs at least three levels")
    sols = []
    params = []
    for k in range(levels):
        if kind == "temporal":
            c = cfg.with_values(tau=cfg.tau / 2 ** k, t_final=cfg.t_final)
            params.append(c.tau)
            sols.append([np.asarray(f) for f in _fields(*_final(c))])
        elif kind == "spatial":
            if cfg.is_2d:
                raise ValueError("spatial studies are implemented for 1D schemes")
            c = cfg.with_values(N=cfg.N * 2 ** k)
            params.append(c.N)
            sols.append([np.asarray(f)[:: 2 ** k] for f in _fields(*_final(c))])
        else:
            raise ValueError(f"unknown study kind {kind!r}")
    diffs = [max(float(np.max(np.abs(a - b))) for a, b in zip(s1, s2))
             for s1, s2 in zip(sols, sols[1:])]
    orders = [math.log2(a / b) if a > 0 and b > 0 else float("nan")
              for a, b in zip(diffs, diffs[1:])]
    return ConvergenceTable(kind, params, diffs, orders)


def is_explicit(scheme: str) -> bool:
    return scheme in EXPLICIT_SCHEMES
