"""Laser-switched phonon coupling and CNOT gates between ions in separated wells."""

from . import constants, qcore, model, dynamics, gates, experiments, output, cli
from .model import (
    IonParams,
    TrapArrayParams,
    LaserParams,
    DerivedCouplings,
    derive_couplings,
)
from .dynamics import analytic_swap, max_swap_probability, DecoherenceParams
from .experiments import (
    default_trap,
    default_laser,
    feasibility_report,
    transfer_probability_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "constants",
    "qcore",
    "model",
    "dynamics",
    "gates",
    "experiments",
    "output",
    "cli",
    "IonParams",
    "TrapArrayParams",
    "LaserParams",
    "DerivedCouplings",
    "derive_couplings",
    "analytic_swap",
    "max_swap_probability",
    "DecoherenceParams",
    "default_trap",
    "default_laser",
    "feasibility_report",
    "transfer_probability_sweep",
    "__version__",
]
