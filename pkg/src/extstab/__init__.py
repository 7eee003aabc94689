"""Extended stabilizer simulation of Clifford circuits with one non-Clifford gate."""

from .circuit import Angle, Circuit, CircuitParseError, load_circuit, parse_circuit
from .extended import (
    ExtendedState,
    NonCliffordError,
    PostSelectionRejected,
    TargetState,
    decompose_unitary,
    rz_terms,
)
from .kernels import BACKEND
from .oracle import DenseState, run_dense
from .pauli import PhasedPauli
from .protocols import (
    SurfaceCodeLayout,
    build_412_injection,
    build_surface_injection,
    build_t_teleportation,
    check_logical_form,
    insert_error_sweep,
)
from .runner import run_extended
from .tableau import GeneratorTableau

__version__ = "0.1.0"

__all__ = [
    "Angle",
    "BACKEND",
    "Circuit",
    "CircuitParseError",
    "DenseState",
    "ExtendedState",
    "GeneratorTableau",
    "NonCliffordError",
    "PhasedPauli",
    "PostSelectionRejected",
    "SurfaceCodeLayout",
    "TargetState",
    "build_412_injection",
    "build_surface_injection",
    "build_t_teleportation",
    "check_logical_form",
    "decompose_unitary",
    "insert_error_sweep",
    "load_circuit",
    "parse_circuit",
    "run_dense",
    "run_extended",
    "rz_terms",
]
