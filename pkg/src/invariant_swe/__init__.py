"""Symmetry-preserving shallow-water schemes on moving meshes."""

from .core import (
    ConvergenceError,
    Grid1D,
    Grid2D,
    PositivityError,
    SchemeError,
    State1D,
    State2D,
    StepSpec,
    TangledMeshError,
)
from .config import PRESETS, SimulationConfig, load_config, parse_config
from .runner import convergence_study, invariance_suite, run

__version__ = "0.1.0"
