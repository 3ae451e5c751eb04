"""Fault-tolerant compilation and noisy simulation for [[n, n-2, 2]] error-detecting codes."""

from .circuit import (
    Circuit,
    Instruction,
    CircuitError,
    ParseError,
    depth,
    count_gates,
    unitary_of,
    phase_distance,
    serialize,
    parse,
)
from .sim import NoiseModel, ShotRecord, ShotTable, run_shot, run_shots
from .iceberg import (
    CodeParams,
    CodeLayout,
    SyndromeSchedule,
    DecodedShot,
    decode_shot,
    decode_table,
    logical_pauli,
)
from .compile import encode, transpile_to_native, squash_1q, synth_logical_gate
from .mcx import McxSpec, synth_mcx, mcx_reference_counts, compiled_mcx_reference_counts
from .grover import (
    GroverSpec,
    build_grover_logical,
    build_grover_bare,
    ideal_success,
    optimal_iterations,
    grover_reference_resources,
    measured_resources,
)
from .stats import (
    DetectionModel,
    expected_success,
    gamma_of_delta,
    catastrophic_probability,
    shots_for_failure_budget,
    metrics,
    bootstrap_ci,
    optimal_syndrome,
)

__all__ = [
    "Circuit", "Instruction", "CircuitError", "ParseError",
    "depth", "count_gates", "unitary_of", "phase_distance", "serialize", "parse",
    "NoiseModel", "ShotRecord", "ShotTable", "run_shot", "run_shots",
    "CodeParams", "CodeLayout", "SyndromeSchedule", "DecodedShot",
    "decode_shot", "decode_table", "logical_pauli",
    "encode", "transpile_to_native", "squash_1q", "synth_logical_gate",
    "McxSpec", "synth_mcx", "mcx_reference_counts", "compiled_mcx_reference_counts",
    "GroverSpec", "build_grover_logical", "build_grover_bare",
    "ideal_success", "optimal_iterations", "grover_reference_resources", "measured_resources",
    "DetectionModel", "expected_success", "gamma_of_delta", "catastrophic_probability",
    "shots_for_failure_budget", "metrics", "bootstrap_ci", "optimal_syndrome",
]
