"""Digital-analog quantum computation: schedule compilers, executors and noise models."""

from .errors import (
    CompileError,
    ConfigError,
    DAQCError,
    DimensionError,
    ExecutionError,
    GeneratorUndefined,
    NegativeDuration,
    NoRemediation,
    PulseOverlap,
    RankDeficient,
    SingularGeneratorSet,
    SingularPairSystem,
    ZeroResourceCoupling,
)
from .models import CouplingProfile, build_ising, build_mbody_target, build_xz_target
from .pauli import SpinHamiltonian, basis_state, fidelity, propagator, word_matrix
from .schedule import AnalogBlock, QubitRotation, RotationLayer, Schedule, apply_rotation_layer
from .ising import compile_ising, cz_gadget
from .xz import compile_xz
from .mbody import compile_mbody
from .executor import run_bdaqc, run_sdaqc, schedule_unitary

__all__ = [
    "AnalogBlock", "CompileError", "ConfigError", "CouplingProfile", "DAQCError", "DimensionError",
    "ExecutionError", "GeneratorUndefined", "NegativeDuration", "NoRemediation", "PulseOverlap",
    "QubitRotation", "RankDeficient", "RotationLayer", "Schedule", "SingularGeneratorSet",
    "SingularPairSystem", "SpinHamiltonian", "ZeroResourceCoupling", "apply_rotation_layer",
    "basis_state", "build_ising", "build_mbody_target", "build_xz_target", "compile_ising",
    "compile_mbody", "compile_xz", "cz_gadget", "fidelity", "propagator", "run_bdaqc", "run_sdaqc",
    "schedule_unitary", "word_matrix",
]

__version__ = "0.1.0"
