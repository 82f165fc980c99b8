"""Desk-scale simulator of a 1-4 ion trapped-ion qubit register.

Reproduces three benchmark experiments end to end: deterministic
entangled-state generation with parity-fringe fidelity certification, a
detector-loophole-free four-setting correlation (Bell) test, and storage of
a logical qubit in the two-ion subspace immune to collective dephasing.
"""

from .analysis import (
    BellSettings,
    ExponentialFit,
    FitError,
    SinusoidFit,
    bell_signal,
    binomial_error,
    coherence_from_sweep,
    correlation_q,
    fidelity_from_parts,
    fit_exponential,
    fit_sinusoid,
)
from .config import (
    ConfigError,
    DfsConfig,
    ExperimentConfig,
    SweepConfig,
    default_config,
    load_config,
)
from .experiments import (
    RunResult,
    calibrate_depolarizing_to_fidelity,
    exact_correlation,
    measured_class_probs,
    measured_parity,
    run_bell,
    run_dfs,
    run_entangle,
    run_experiment,
)
from .gates import (
    CarrierPulse,
    EntanglePulse,
    analysis_phase_reference,
    carrier_matrix,
    compose,
    ghz_phase,
    ms_matrix,
)
from .noise import (
    AMBIENT_HARMONICS_HZ,
    DephasingProcess,
    NoiseConfig,
    ambient_dephase_channel,
    collective_dephase_channel,
    collective_dephase_unitary,
    depolarize,
    sample_collective_phase,
)
from .readout import (
    ReadoutConfig,
    ShotRecord,
    calibrate_readout,
    classify_ideal_flip,
    classify_threshold,
    misclassification_rate,
    optimal_thresholds,
    sample_outcome,
    sample_photon_counts,
)
from .register import (
    DensityMatrix,
    PureState,
    apply_kraus,
    apply_unitary,
    matrix_element,
    new_ground,
    parity_expectation,
    reduced_density,
    to_density,
    z_basis_probabilities,
)
from .sequences import (
    decode_dfs,
    encode_dfs,
    input_amplitudes,
    prepare_input,
)
from .cli import cli_main

__version__ = "0.1.0"
