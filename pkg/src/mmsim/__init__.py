"""Minimalistic measurement scheme: ancilla-based measurement, gradual collapse, branching histories."""

from .collapse import (
    CollapseCurve,
    NStarEstimate,
    asymptotic_nstar,
    binomial_entropy,
    default_theta_grid,
    estimate_nstar,
    explicit_collapse_oracle,
    extraction_curve,
    nstar_curve_length,
    nstar_sweep,
    outcome_distribution,
    small_x_extraction,
    total_kraus,
)
from .errors import MMSError, SpecError
from .gates import (
    HADAMARD_PARAMS,
    PROJECTIVE,
    RotationParams,
    embed,
    hadamard,
    rotation_gate,
    rotation_matrix,
    standard_gate,
)
from .history import (
    BranchTree,
    GateOp,
    HistoryDensityMatrix,
    HistorySpec,
    PremeasureEvent,
    apply_mms_to_history,
    build_history_state,
    chain_operator,
    conditional_probability,
    conditional_table,
    consistency_check,
    generalized_history_operator,
    history_density_matrix,
    marginalize,
)
from .mms import (
    ancilla_projectors,
    erase_premeasurement,
    fidelity,
    kraus_ops,
    mms_measure,
    premeasure,
    sample_outcome,
    von_neumann_collapse_oracle,
)
from .qstate import (
    A,
    S,
    X,
    DensityOperator,
    QubitLabel,
    StateVector,
    UnitaryOperator,
    apply_unitary,
    partial_trace,
    shannon_entropy,
    tensor,
    von_neumann_entropy,
)
from .specfile import parse_history_spec, serialize_history_spec

__version__ = "0.1.0"

__all__ = [
    "A",
    "S",
    "X",
    "HADAMARD_PARAMS",
    "PROJECTIVE",
    "BranchTree",
    "CollapseCurve",
    "DensityOperator",
    "GateOp",
    "HistoryDensityMatrix",
    "HistorySpec",
    "MMSError",
    "NStarEstimate",
    "PremeasureEvent",
    "QubitLabel",
    "RotationParams",
    "SpecError",
    "StateVector",
    "UnitaryOperator",
    "ancilla_projectors",
    "apply_mms_to_history",
    "apply_unitary",
    "asymptotic_nstar",
    "binomial_entropy",
    "build_history_state",
    "chain_operator",
    "conditional_probability",
    "conditional_table",
    "consistency_check",
    "default_theta_grid",
    "embed",
    "erase_premeasurement",
    "estimate_nstar",
    "explicit_collapse_oracle",
    "extraction_curve",
    "fidelity",
    "generalized_history_operator",
    "hadamard",
    "history_density_matrix",
    "kraus_ops",
    "marginalize",
    "mms_measure",
    "nstar_curve_length",
    "nstar_sweep",
    "outcome_distribution",
    "parse_history_spec",
    "partial_trace",
    "premeasure",
    "rotation_gate",
    "rotation_matrix",
    "sample_outcome",
    "serialize_history_spec",
    "shannon_entropy",
    "small_x_extraction",
    "standard_gate",
    "tensor",
    "total_kraus",
    "von_neumann_collapse_oracle",
    "von_neumann_entropy",
]
