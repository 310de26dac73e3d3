"""Nonlocal drift-diffusion on the torus: symbols, dyadic blocks, a spectral solver and estimate checks."""

from .grid import FrequencyLattice, lp_norm
from .harness import EstimateReport, IterationSchedule
from .kernels import (
    LevyKernelSpec, QuadratureConfig, symbol_from_kernel, symbol_grid, validate_kernel,
)
from .littlewood_paley import besov_norm, build_partition, decompose
from .presets import PRESETS, run_preset
from .solver import DataSpec, DriftSpec, ForcingSpec, SolverConfig, solve

__all__ = [
    "DataSpec", "DriftSpec", "EstimateReport", "ForcingSpec", "FrequencyLattice",
    "IterationSchedule", "LevyKernelSpec", "PRESETS", "QuadratureConfig", "SolverConfig",
    "besov_norm", "build_partition", "decompose", "lp_norm", "run_preset", "solve",
    "symbol_from_kernel", "symbol_grid", "validate_kernel",
]
