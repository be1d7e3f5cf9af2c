"""Discrete mass, momentum and energy for 1D and 2D trajectories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Grid1D, Grid2D, State1D, State2D, TangledMeshError, jacobian_2d

# momenta that start at (numerically) zero are reported relative to the
# total absolute momentum instead of to their own initial value
_ZERO_MOMENTUM = 1e-6


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    M: float
    P: float
    H: float
    Py: float | None = None
    # scale of |momentum| used when P(0) or Py(0) vanishes
    P_scale: float = 0.0
    Py_scale: float = 0.0

    @property
    def is_2d(self) -> bool:
        return self.Py is not None


def conserved_1d(grid: Grid1D, state: State1D, t: float = 0.0) -> DiagnosticsRecord:
    dx = grid.central_spacing()
    h, u = state.h, state.u
    return DiagnosticsRecord(
        t=float(t),
        M=0.5 * float(np.sum(h * dx)),
        P=0.5 * float(np.sum(h * u * dx)),
        H=0.25 * float(np.sum((h * u * u + h * h) * dx)),
        P_scale=0.5 * float(np.sum(h * np.abs(u) * dx)),
    )


def conserved_2d(grid: Grid2D, state: State2D, t: float = 0.0) -> DiagnosticsRecord:
    J = jacobian_2d(grid)
    if not np.all(J > 0):
        raise TangledMeshError("nonpositive Jacobian in diagnostics")
    cell = grid.dxi * grid.deta
    h, u, v = state.h, state.u, state.v
    return DiagnosticsRecord(
        t=float(t),
        M=cell * float(np.sum(h * J)),
        P=cell * float(np.sum(h * u * J)),
        Py=cell * float(np.sum(h * v * J)),
        H=0.5 * cell * float(np.sum((h * (u * u + v * v) + h * h) * J)),
        P_scale=cell * float(np.sum(h * np.abs(u) * J)),
        Py_scale=cell * float(np.sum(h * np.abs(v) * J)),
    )


def _momentum_reference(p0: float, scale: float) -> float:
    if abs(p0) > _ZERO_MOMENTUM * scale or scale == 0.0:
        return abs(p0)
    return scale


def relative_changes(rec: DiagnosticsRecord, ref: DiagnosticsRecord) -> dict[str, float]:
    """Relative change of every conserved quantity of ``rec`` against ``ref``."""
    def rel(q, q0, d):
        return (q - q0) / d if d != 0.0 else float("nan")

    out = {
        "relM": rel(rec.M, ref.M, abs(ref.M)),
        "relP": rel(rec.P, ref.P, _momentum_reference(ref.P, ref.P_scale)),
        "relH": rel(rec.H, ref.H, abs(ref.H)),
    }
    if rec.is_2d:
        out["relPy"] = rel(rec.Py, ref.Py, _momentum_reference(ref.Py, ref.Py_scale))
    return out


def record_series(trajectory) -> tuple[list[DiagnosticsRecord], list[dict[str, float]]]:
    """Diagnostics for an iterable of ``(t, grid, state)`` samples.

    Returns the records and, for every sample after the first, its relative
    changes against the first record.
    """
    records = []
    for t, grid, state in trajectory:
        if isinstance(grid, Grid1D):
            records.append(conserved_1d(grid, state, t))
        else:
            records.append(conserved_2d(grid, state, t))
    if not records:
        raise ValueError("empty trajectory")
    changes = [relative_changes(r, records[0]) for r in records[1:]]
    return records, changes


def csv_header(is_2d: bool) -> list[str]:
    if is_2d:
        return ["t", "M", "P", "Py", "H", "relM", "relP", "relPy", "relH"]
    return ["t", "M", "P", "H", "relM", "relP", "relH"]


def csv_row(rec: DiagnosticsRecord, ref: DiagnosticsRecord) -> list[float]:
    ch = relative_changes(rec, ref)
    if rec.is_2d:
        return [rec.t, rec.M, rec.P, rec.Py, rec.H, ch["relM"], ch["relP"], ch["relPy"], ch["relH"]]
    return [rec.t, rec.M, rec.P, rec.H, ch["relM"], ch["relP"], ch["relH"]]
