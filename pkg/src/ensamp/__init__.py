"""Compressive acquisition and low-rank recovery of correlated signal ensembles."""

from .signal_model import (
    SPEED_OF_LIGHT,
    LowRankFactors,
    SteeringVector,
    build_Raa,
    effective_rank,
    factorize,
    fourier_from_samples,
    gen_correlated_bandlimited,
    gen_lowrank_gaussian,
    steering,
    synth_from_fourier,
    whiten_known,
)
from .diversify import (
    FilterSpectrum,
    LowpassGains,
    Mixer,
    ModulatorBank,
    apply_filter,
    apply_integrator_model,
    gen_filter,
    gen_mixer,
    gen_modulator_bank,
    lowpass_gains,
    preprocess,
    preprocess_adjoint,
)
from .operators import (
    VARIANTS,
    BlockPartition,
    DemodulatorOp,
    EntryMaskOp,
    MeasurementRecord,
    SamplingMask,
    UniversalOp,
    add_noise,
    block_partition,
    demod_adjoint,
    demod_forward,
    expectation_identity_check,
    gen_sampling_mask,
    make_operator,
    mask_adjoint,
    mask_forward,
    measure,
    sigma_for_snr,
    snr_db,
)
from .coherence import CoherenceReport, compute_coherences, lemma_check
from .recovery import (
    RecoveryResult,
    SolverConfig,
    klt_estimate,
    nuclear_norm,
    oversampling_factor,
    relative_error,
    solve_nuclear_equality,
    solve_nuclear_noisy,
    svt,
)
from .harness import (
    ARRAY_HEADER,
    EXPERIMENT_HEADER,
    ExperimentSpec,
    gen_spike,
    run_arch_compare,
    run_array_demo,
    run_invariant_suite,
    run_phase_transition,
    run_recovery_trial,
    run_stability,
)
from .seeding import seed_to_int, sub_rng, sub_seed
from .textio import (
    load_config,
    parse_config_text,
    read_measurement_archive,
    write_csv,
    write_measurement_archive,
)

__version__ = "0.1.0"
