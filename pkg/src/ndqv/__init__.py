"""Nondemolition quantum state verification at desk scale.

Dense linear-algebra simulation of projective verification strategies and
their single-copy sequential counterparts, with spectral-gap certification,
gate-level circuit realizations, and a reproducible Monte Carlo harness.
"""

from .catalog import (
    build_sequential,
    build_strategy,
    has_sequential,
    needs_theta,
    sequential_adaptive,
    sequential_bell,
    sequential_ghz,
    sequential_ghz3,
    sequential_two_qubit,
    strategy_names,
)
from .checks import CheckResult, check_names, run_checks
from .circuits import (
    Circuit,
    Gate,
    MeasurementRecord,
    apply,
    circuit_unitary,
    compile_adaptive,
    compile_bell,
    compile_ghz3,
    compile_two_qubit,
    fresh_input,
    parse_circuit,
    pass_kraus,
    rotated_cnot_checks,
    rotated_toffoli_check,
    serialize_circuit,
)
from .harness import (
    ExperimentSpec,
    RunReport,
    confidence_chernoff,
    confidence_exponential,
    estimate_fidelity,
    report_to_csv,
    report_to_dict,
    report_to_json,
    run_experiment,
    wilson_interval,
)
from .rng import slot_uniform, uniform_table
from .sequential import (
    QndSetting,
    SequentialProtocol,
    appended_setting_gap,
    build_qnd_setting,
    compose_sequential,
    conditional_equivalence,
    effective_operator,
    fidelity_transform,
    full_operator,
    protocol_from_dict,
    protocol_gap,
    protocol_to_dict,
    stage_pass_probabilities,
    summation_form,
)
from .states import (
    NoiseSpec,
    StabilizerGroupSpec,
    TargetState,
    bell_state,
    fidelity,
    ghz,
    pauli_operator,
    source_density,
    stabilizer_state,
    two_qubit_pure,
)
from .strategies import (
    GapReport,
    Setting,
    Strategy,
    adaptive_three,
    adaptive_two,
    bell_minimal,
    bell_stabilizer_group,
    ghz_generator_spec,
    sample_complexity,
    spectral_gap,
    stabilizer_full_group,
    stabilizer_generators,
    strategy_from_dict,
    strategy_to_dict,
    two_qubit_four,
    two_qubit_three,
)

__version__ = "0.1.0"

__all__ = [
    "CheckResult",
    "Circuit",
    "ExperimentSpec",
    "Gate",
    "GapReport",
    "MeasurementRecord",
    "NoiseSpec",
    "QndSetting",
    "RunReport",
    "SequentialProtocol",
    "Setting",
    "StabilizerGroupSpec",
    "Strategy",
    "TargetState",
    "adaptive_three",
    "adaptive_two",
    "appended_setting_gap",
    "apply",
    "bell_minimal",
    "bell_stabilizer_group",
    "bell_state",
    "build_qnd_setting",
    "build_sequential",
    "build_strategy",
    "check_names",
    "circuit_unitary",
    "compile_adaptive",
    "compile_bell",
    "compile_ghz3",
    "compile_two_qubit",
    "compose_sequential",
    "conditional_equivalence",
    "confidence_chernoff",
    "confidence_exponential",
    "effective_operator",
    "estimate_fidelity",
    "fidelity",
    "fidelity_transform",
    "fresh_input",
    "full_operator",
    "ghz",
    "ghz_generator_spec",
    "has_sequential",
    "needs_theta",
    "parse_circuit",
    "pass_kraus",
    "pauli_operator",
    "protocol_from_dict",
    "protocol_gap",
    "protocol_to_dict",
    "report_to_csv",
    "report_to_dict",
    "report_to_json",
    "rotated_cnot_checks",
    "rotated_toffoli_check",
    "run_checks",
    "run_experiment",
    "sample_complexity",
    "sequential_adaptive",
    "sequential_bell",
    "sequential_ghz",
    "sequential_ghz3",
    "sequential_two_qubit",
    "serialize_circuit",
    "slot_uniform",
    "source_density",
    "spectral_gap",
    "stabilizer_full_group",
    "stabilizer_generators",
    "stabilizer_state",
    "stage_pass_probabilities",
    "strategy_from_dict",
    "strategy_names",
    "strategy_to_dict",
    "summation_form",
    "two_qubit_four",
    "two_qubit_pure",
    "two_qubit_three",
    "uniform_table",
    "wilson_interval",
]
