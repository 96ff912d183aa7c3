"""Petz recovery maps, QEC matrices, and optimality certificates.

The package analyzes how well the Petz recovery map undoes a quantum channel
and certifies, without optimization, whether it is the best possible
recovery in entanglement fidelity. A numerical optimal-recovery solver and
KKT dual certificates cross-check the analytic criteria, and a zoo of
generators reproduces the known analytical families.
"""

from .channels import (
    ChoiMatrix,
    DensityOperator,
    KrausChannel,
    adjoint,
    apply,
    as_density,
    channel_from_json,
    channel_from_qec_matrix,
    channel_to_json,
    choi,
    choi_from_json,
    choi_to_json,
    compose,
    kraus_from_choi,
    maximally_mixed,
    validate,
)
from .errors import (
    BadDimensions,
    BadDistribution,
    CutoffTooSmall,
    DegenerateEncoding,
    DimensionMismatch,
    InfeasibleParameters,
    NotHermitian,
    NotPSD,
    NotSquare,
    NotTP,
    PetzoptError,
    ShapeMismatch,
    SupportViolation,
)
from .linops import (
    eigh,
    frob_norm,
    hermitian_power,
    is_psd,
    kron,
    partial_trace,
    support_contained,
    support_projector,
)
from .optimal import (
    KktCertificate,
    RecoverySolution,
    fidelity_linear,
    kkt_certificate,
    optimize_recovery,
    project_cptp,
    recovery_gradient,
)
from .petz import (
    BlockReport,
    FidelityReport,
    OptimalityCertificate,
    QecMatrix,
    b_matrix,
    block_structure_check,
    certify,
    entanglement_fidelity_direct,
    kl_residual,
    petz_fidelity_compact,
    petz_map,
    qec_matrix,
    t_matrix,
    tc_fidelity,
)
from .zoo import (
    ZooFixture,
    c2c_channel,
    clock_shift,
    direct_sum_example,
    direct_sum_fixture,
    gkp_state,
    gkp_tail,
    gkp_transduction,
    pauli_channel,
    qubit_example,
    random_channel,
    random_fixture,
    toy_channel,
)

__version__ = "0.1.0"
