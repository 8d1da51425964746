"""Multi-stage RL control of transmission line flows on an AC power flow core."""

from gridflow.grid import (
    Branch,
    Bus,
    BusKind,
    CaseFormatError,
    CaseValidationError,
    Generator,
    GridCase,
    Load,
    apply_generator_setpoints,
    apply_load_group,
    load_case,
    save_case,
)

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "Bus",
    "BusKind",
    "CaseFormatError",
    "CaseValidationError",
    "Generator",
    "GridCase",
    "Load",
    "apply_generator_setpoints",
    "apply_load_group",
    "load_case",
    "save_case",
    "__version__",
]
