"""Engineering spin-spin correlations in a 1D atomic lattice with QND pulses.

The package simulates sequences of standing-wave quantum non-demolition
measurement pulses acting on the Gaussian covariance state of a lattice of
spin-j bins, designs the pulse couplings that realise a target correlation
shape, and analyses the result (decay fits, k-spectra, entanglement witness).
"""

from .lattice import (
    AXES,
    CovarianceState,
    EnsembleConfig,
    InvariantViolation,
    check_invariants,
    gamma0,
    k_spectrum,
    k_spectrum_direct,
    new_mixed_state,
    real_correlation,
)
from .pulse import (
    Pulse,
    PulseDiagnostics,
    apply_decoherence,
    apply_pulse,
    standing_wave_weights,
    zero_means,
)
from .design import (
    DesignResult,
    InfeasibleTargetError,
    TargetSpec,
    design_sequence,
    fractions_to_couplings,
    sample_target,
    target_to_fractions,
)
from .protocol import PulsePlan, RunReport, build_plan, run
from .witness import WitnessQuery, witness_scan, witness_value
from .analysis import FitResult, fit_algebraic, fit_exponential, spectrum_match
from .pipeline import PRESETS, RunConfig, run_pipeline, write_outputs

__version__ = "0.1.0"

__all__ = [
    "AXES",
    "CovarianceState",
    "DesignResult",
    "EnsembleConfig",
    "FitResult",
    "InfeasibleTargetError",
    "InvariantViolation",
    "PRESETS",
    "Pulse",
    "PulseDiagnostics",
    "PulsePlan",
    "RunConfig",
    "RunReport",
    "TargetSpec",
    "WitnessQuery",
    "apply_decoherence",
    "apply_pulse",
    "build_plan",
    "check_invariants",
    "design_sequence",
    "fit_algebraic",
    "fit_exponential",
    "fractions_to_couplings",
    "gamma0",
    "k_spectrum",
    "k_spectrum_direct",
    "new_mixed_state",
    "real_correlation",
    "run",
    "run_pipeline",
    "sample_target",
    "spectrum_match",
    "standing_wave_weights",
    "target_to_fractions",
    "witness_scan",
    "witness_value",
    "write_outputs",
    "zero_means",
]
