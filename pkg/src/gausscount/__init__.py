"""Counting-based simulation and tomography of multimode Gaussian states."""

__version__ = "0.1.0"

from .channels import (
    ChannelEstimate,
    GaussianChannel,
    apply,
    attenuator,
    channel_from_dict,
    channel_to_dict,
    compose,
    identity_channel,
    measure_channel_probes,
    probe_states,
    random_channel,
    reconstruct_channel,
    solve_channel,
    validate_channel,
)
from .counting import (
    DivisibilityReport,
    NumberPGF,
    PureFactorization,
    infinite_divisibility_check,
    joint_pgf,
    mean_N,
    pmf,
    prob_zero,
    pure_factorization,
    spectral_data,
    total_pgf,
    var_N,
)
from .states import (
    Displacement,
    GaussianState,
    coherent,
    conjugate,
    displace,
    fourier_transform,
    new_state,
    overlap,
    purity_check,
    random_state,
    state_from_dict,
    state_to_dict,
    thermal,
    vacuum,
)
from .symplectic import (
    TwoModeUnitary,
    U_H,
    U_K,
    embed,
    is_symplectic,
    make_form,
    offdiag_block,
    random_symplectic,
    rotation_squeeze,
    tau,
    two_mode_gate_matrix,
    unitary_to_orthosymplectic,
)
from .tomography import (
    ExactBackend,
    GateDescriptor,
    MeasurementPlan,
    MeasurementRecord,
    NoisyBackend,
    ReconstructionResult,
    conjugated_expectation,
    displaced_expectation,
    measure,
    plan_means_only,
    plan_state_tomography,
    reconstruct_state,
    records_from_jsonl,
    records_to_jsonl,
    solve_diagonal_blocks,
    solve_means,
    solve_offdiagonal_blocks,
    solve_trace,
)
