"""Design laboratory for the Salecker-Wigner three-body quantum clock."""

__version__ = "0.1.0"

from .quantities import (  # noqa: E402
    ConfigurationError,
    PhysicalConstants,
    Quantity,
    load_constants,
)
from .design import (  # noqa: E402
    GENERAL_DIAL,
    MAXIMAL_DIAL,
    ClockDesign,
    DesignError,
    DesignInput,
    InconsistentError,
    UnderdeterminedError,
    close_design,
    invert_for,
)
from .feasibility import Axis, FeasibilityReport, SweepResult, check, material_note, sweep  # noqa: E402
from .wavepacket import (  # noqa: E402
    GaussianPacketState,
    GridSpec,
    GridState,
    arrival_time_spread,
    propagate_grid,
    verify_spreading_condition,
    width_at,
)

__all__ = [
    "Axis", "ClockDesign", "ConfigurationError", "DesignError", "DesignInput",
    "FeasibilityReport", "GENERAL_DIAL", "GaussianPacketState", "GridSpec", "GridState",
    "InconsistentError", "MAXIMAL_DIAL", "PhysicalConstants", "Quantity",
    "SweepResult", "UnderdeterminedError", "arrival_time_spread", "check",
    "close_design", "invert_for", "load_constants", "material_note",
    "propagate_grid", "sweep", "verify_spreading_condition", "width_at",
]
