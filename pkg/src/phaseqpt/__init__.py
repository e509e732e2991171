"""Process-tomography simulation and estimation for phase-qubit gates.

The package builds the SQiSW / i-SWAP / CNOT gate family generated by
capacitive qubit coupling, represents noisy processes as unit-trace chi
matrices, simulates tomographic measurement records under two input-state
protocols, reconstructs the chi matrix by constrained maximum likelihood and
characterizes the statistical distribution of the fidelity loss.
"""

from .channels import (
    ChiMatrix,
    KrausSet,
    NoiseModel,
    NotCompletelyPositiveError,
    ProcessBasis,
    apply_channel,
    change_basis,
    check_trace_preserving,
    chi_from_kraus,
    chi_of_gate,
    depolarized_chi,
    free_parameter_count,
    kraus_from_chi,
    maximally_mixed_chi,
    noisy_chi,
    pauli_basis,
    random_tp_kraus,
    unitary_remix,
)
from .fidelity_stats import (
    CampaignConfig,
    FidelitySample,
    Gx2Coeffs,
    compare_protocols,
    empirical_density,
    gx2_fit,
    gx2_moments,
    gx2_sample,
    run_campaign,
    true_chi,
)
from .gates import (
    Gate,
    cnot,
    cnot_via_sqiswap,
    gate_by_name,
    interaction_hamiltonian,
    interaction_unitary,
    iswap,
    rotation_gate,
    sqiswap,
)
from .linalg import (
    matrix_from_json,
    matrix_to_json,
    partial_trace_second,
    psd_sqrt,
    tensor_product,
    unvec,
    vec,
)
from .phase_qubit import (
    PhaseQubitParams,
    equilibrium_phase,
    harmonic_levels,
    plasma_frequency,
    qubit_hamiltonian,
)
from .protocols import (
    BlochState,
    Protocol,
    build_protocol,
    product_inputs,
    standard_states,
    tetrahedron_states,
)
from .tomography import (
    CountsRecord,
    MleOptions,
    ReconstructionResult,
    exact_counts,
    mle_reconstruct,
    outcome_probabilities,
    process_fidelity,
    simulate_counts,
)

__version__ = "0.1.0"
