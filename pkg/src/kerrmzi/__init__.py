"""Truncated-Fock-space simulation of Kerr-nonlinear Mach-Zehnder interferometers.

States are stored per total-photon-number sector (see :mod:`kerrmzi.fockspace`).
The interferometer, detection models, Fisher information and entanglement
witnesses build on that representation.
"""

from . import _core
from .detection import (
    DetectorModel,
    JointCountDistribution,
    apply_detector_efficiency,
    coherent_parity_oracle,
    intensity_difference_distribution,
    joint_count_distribution,
    marginal_number_distribution,
    number_parity_oracle,
    parity_expectation,
    parity_filter,
    thermal_parity_oracle,
)
from .errors import (
    DerivativeMismatchError,
    DoubleSmearError,
    KerrMZIError,
    NegativeEigenvalueError,
    TruncationError,
    UndefinedG2,
    UnsupportedChi,
    ZeroInformation,
)
from .fockspace import (
    ModeA,
    ModeB,
    ModeSelector,
    SectorDensity,
    SectorState,
    apply_beamsplitter,
    apply_cross_kerr,
    apply_phase_shift,
    apply_self_kerr,
    beamsplitter_sector_matrix,
    mode_number_moments,
)
from .inputs import InputKind, InputSpec, build_input, required_cutoff
from .interferometer import (
    CircuitSpec,
    LossChannel,
    LossStage,
    MZIKind,
    Tap,
    apply_arm_loss,
    run_circuit,
    state_after_second_bs,
    state_before_phase,
)
from .metrology import (
    FisherReport,
    PhaseProbe,
    analytic_qfi_reference,
    classical_fisher,
    cramer_rao_minimum,
    distribution_derivative,
    fisher_report,
    maximize_over_phase,
    min_phase_error_scan,
    phase_error_from_parity,
    qfi,
    qfi_pure,
)
from .witnesses import MomentSet, compute_moments, g2_zero, hillery_zubairy, shchukin_vogel

__version__ = "0.1.0"
