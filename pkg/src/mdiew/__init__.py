"""Measurement-device-independent entanglement witnessing toolkit."""

from .linalg import (
    BELL_LABELS,
    bell_projector,
    bell_state,
    min_eigenvalue,
    outcome_unitary,
    partial_trace,
    pauli,
    permute_subsystems,
    tensor_product,
    transpose,
)
from .states import (
    GENERATOR_NAME,
    MixtureTerm,
    Povm,
    StructuredState,
    ideal_bsm,
    noisy_bsm,
    product_state,
    random_density_matrix,
    random_k_producible,
    random_povm,
    random_separable,
    random_state_vector,
    singlet,
    w_state,
    w_state_noise,
    werner,
)
from .witness import (
    AncillaBasis,
    OutcomeCoefficientTable,
    SeparabilityClass,
    Witness,
    decompose,
    default_basis,
    outcome_coefficients,
    projector_witness,
    reconstruct,
    transform_basis,
    w_depth_witness,
    werner_witness,
)
from .protocol import (
    ProbabilityTable,
    apply_map_m,
    ideal_probability,
    mdiew_value,
    povm_probability,
    probability_table,
    single_outcome_value,
)
from .stats import (
    CountRecord,
    Estimate,
    ExperimentConfig,
    SchemeComparison,
    estimate_value,
    scheme_comparison,
    simulate_counts,
)
from .structure import (
    DepthVerdict,
    HarnessReport,
    Partition,
    certificate_depth,
    depth_detection,
    structure_witness_check,
)

__version__ = "0.1.0"
