"""Discontinuous Petrov-Galerkin simulation of a Yb-doped fiber amplifier slab.

The package couples two time-harmonic Maxwell systems (signal and pump) through
saturable ytterbium gain, solved by Picard iteration, to a transient heat
equation through the quantum-defect heat and the thermo-optic effect.
"""
from .errors import (ConfigError, FiberDPGError, InvalidParameterError, NonConvergenceError,
                     NumericalBreakdownError, SingularSystemError, UndefinedEfficiencyError)
from .io import SimulationConfig, load_config, parse_config

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "FiberDPGError", "InvalidParameterError", "NonConvergenceError",
    "NumericalBreakdownError", "SingularSystemError", "UndefinedEfficiencyError",
    "SimulationConfig", "load_config", "parse_config", "__version__",
]
