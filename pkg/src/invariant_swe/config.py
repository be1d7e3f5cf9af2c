"""Flat ``key = value`` simulation configuration, scheme catalog and presets."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

SCHEMES_1D = {
    "lagrangian_explicit": "primitive form, grid moving with the flow, explicit",
    "lagrangian_trapezoidal": "primitive form, grid moving with the flow, trapezoidal",
    "conservative_explicit": "momentum form, Lagrangian grid, explicit",
    "conservative_trapezoidal": "momentum form, Lagrangian grid, trapezoidal",
    "computational_explicit": "primitive form on an adaptive mesh, explicit",
    "computational_trapezoidal": "primitive form on an adaptive mesh, trapezoidal",
    "computational_conservative_explicit": "momentum form on an adaptive mesh, explicit",
    "computational_conservative_trapezoidal": "momentum form on an adaptive mesh, trapezoidal",
}
SCHEMES_2D = {
    "fv_explicit": "finite-volume Lagrangian, explicit",
    "fv_trapezoidal": "finite-volume Lagrangian, trapezoidal",
    "eulerian_trapezoidal": "conservative scheme in computational coordinates on an elliptic grid",
}
SCHEMES = {**SCHEMES_1D, **SCHEMES_2D}
EXPLICIT_SCHEMES = {"lagrangian_explicit", "conservative_explicit", "computational_explicit",
                    "computational_conservative_explicit", "fv_explicit"}
MESH_MODES = ("adaptive", "static", "prescribed")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimulationConfig:
    scheme: str = "conservative_trapezoidal"
    N: int = 51
    Nx: int = 71
    Ny: int = 71
    L: float = 2 * math.pi
    Lx: float = 2 * math.pi
    Ly: float = 2 * math.pi
    tau: float = 1e-3
    t_final: float = 3.0
    A: float = 0.4
    phi0: float = math.pi / 6
    h0: float = 10.0
    # 1D monitor
    monitor: str = "arc_length_u"
    alpha: float = 0.8
    beta: float = 0.0
    # 2D weight
    weight: str = "laplacian_h"
    weight_alpha: float = 0.4
    laplacian: str = "nodal"
    smooth: int = 0
    mesh_relax: float = 1.0
    interp: str = "sibson"
    # mesh motion of the computational-coordinate schemes
    mesh: str = "adaptive"
    mesh_amp: float = 0.1
    tol: float = 1e-12
    max_iter: int = 200
    mesh_tol: float = 1e-10
    snapshot_stride: int = 0
    diag_stride: int = 1
    mesh_stride: int = 10

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ConfigError("tau must be a positive finite number")
        if not self.t_final >= 0:
            raise ConfigError("t_final must be nonnegative")
        if min(self.N, self.Nx, self.Ny) < 3:
            raise ConfigError("grid sizes must be at least 3")
        if min(self.L, self.Lx, self.Ly) <= 0:
            raise ConfigError("domain lengths must be positive")
        if not self.h0 > 0:
            raise ConfigError("h0 must be positive")
        if self.mesh not in MESH_MODES:
            raise ConfigError(f"mesh must be one of {MESH_MODES}")
        if not 0 < self.mesh_relax <= 1:
            raise ConfigError("mesh_relax must lie in (0, 1]")
        if self.interp not in ("sibson", "mean"):
            raise ConfigError("interp must be sibson or mean")
        if min(self.diag_stride, self.mesh_stride) < 1 or self.snapshot_stride < 0:
            raise ConfigError("strides must be positive (snapshot_stride 0 disables snapshots)")
        if self.max_iter < 1 or not self.tol > 0 or not self.mesh_tol > 0:
            raise ConfigError("solver tolerances and iteration limits must be positive")

    @property
    def is_2d(self) -> bool:
        return self.scheme in SCHEMES_2D

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.tau))

    def with_values(self, **kw) -> "SimulationConfig":
        return replace(self, **kw)


PRESETS = {
    "fig2": SimulationConfig(scheme="conservative_trapezoidal", N=51, tau=1e-3, t_final=3.0),
    "fig3": SimulationConfig(scheme="computational_conservative_trapezoidal", N=51, tau=1e-3,
                             t_final=3.0, monitor="arc_length_u", alpha=0.8),
    "fig4": SimulationConfig(scheme="fv_trapezoidal", Nx=71, Ny=71, tau=1e-3, t_final=2.0,
                             mesh_stride=100),
    # the lagged grid/weight feedback is unstable without smoothing and relaxation
    "fig5": SimulationConfig(scheme="eulerian_trapezoidal", Nx=71, Ny=71, tau=1e-3, t_final=2.0,
                             weight="laplacian_h", weight_alpha=0.4, laplacian="nodal",
                             smooth=4, mesh_relax=0.1, mesh_stride=100),
}

_TYPES = {f.name: f.type for f in fields(SimulationConfig)}
_CASTS = {"int": int, "float": float, "str": str}


def _cast(key: str, raw: str):
    typ = _CASTS[_TYPES[key]]
    if typ is float:
        expr = raw.strip().lower().replace("pi", repr(math.pi))
        try:
            return float(expr)
        except ValueError:
            pass
        # allow simple fractions such as pi/6
        if "/" in expr:
            num, den = expr.split("/", 1)
            try:
                return float(num) / float(den)
            except ValueError:
                pass
        raise ConfigError(f"{key}: cannot parse {raw!r} as a number")
    try:
        return typ(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from exc


def parse_config(text: str, base: SimulationConfig | None = None) -> SimulationConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment; ``preset = figN`` picks the base."""
    values = {}
    preset = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key == "preset":
            preset = raw
            continue
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _cast(key, raw)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        base = PRESETS[preset]
    base = base or SimulationConfig()
    try:
        return replace(base, **values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> SimulationConfig:
    return parse_config(Path(path).read_text())


def describe_keys() -> str:
    """One line per key with its default, for ``--help``."""
    default = SimulationConfig()
    lines = [f"  {f.name} = {getattr(default, f.name)!r}" for f in fields(SimulationConfig)]
    return "\n".join(lines)
