"""Certify two-qubit entanglement with weak measurements, then recover it."""

__version__ = "0.1.0"

from .certify import (
    CertificationResult,
    CertTest,
    CorrelationEstimate,
    Trust,
    certify,
    certify_exact,
    certify_sampled,
    chsh,
    correlation,
    estimate_correlation,
    steering,
    witness_from_pauli,
    witness_weak,
)
from .core import (
    MAXIMALLY_MIXED,
    PHI_PLUS,
    X_HAT,
    Y_HAT,
    Z_HAT,
    ZMX_HAT,
    ZPX_HAT,
    BlochVector,
    DensityMatrix,
    PureState,
    hermitian_eigensystem,
    hermitian_sqrt,
    tensor_product,
)
from .measurement import (
    ReversalMeasurement,
    WeakMeasurement,
    apply_measurement,
    generalized_observable,
    joint_outcome_probability,
    projector,
    reversal_operator,
    sample_outcomes,
    strength_from_waveplate,
    weak_operator,
)
from .metrics import (
    CHSH_PLAN,
    WITNESS_PLAN,
    AveragingPlan,
    StateMetrics,
    averaged_quantity,
    concurrence,
    entanglement_of_formation,
    fidelity_with_pure,
    purity,
    reversibility,
    tomography_linear_inversion,
)
from .monitor import EnsembleReport, OUProcess, SelectionConfig, mixed_state, ou_step, run_monitoring
from .protocol import (
    RecoveryStatus,
    ReversalPolicy,
    SweepGrid,
    TrialRecord,
    run_trial,
    run_trials,
    sweep_certification,
    sweep_recovery,
    tradeoff_curves,
)
from .rng import RngStream
