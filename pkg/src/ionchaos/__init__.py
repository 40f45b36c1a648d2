"""Simulation of a single trapped ion driven by a pair of Raman laser beams.

Classically the system is a harmonic oscillator driven by a plane wave;
quantum mechanically it is a truncated-Fock-basis Schroedinger problem.
The package covers the SI <-> dimensionless parameter conversions, the
Raman coupling tensors, classical integration in Cartesian and
action-angle variables, Fock-basis propagation, spectral chaos
indicators, and a CLI that emits machine-readable figure data.
"""

__version__ = "0.1.0"

from .params import DimensionlessParams, PhysicalConfig, derive_dimensionless
from .classical import ClassicalState, ActionAngleState

__all__ = [
    "DimensionlessParams",
    "PhysicalConfig",
    "derive_dimensionless",
    "ClassicalState",
    "ActionAngleState",
    "__version__",
]
