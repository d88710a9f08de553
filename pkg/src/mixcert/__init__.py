"""Certificates for networks trained on non-stationary mixing sequences."""

from .bounds import (
    BoundReport,
    Lemma3Report,
    RampDominanceReport,
    SymmetrizationReport,
    TailReport,
    certification_run,
    concentration_term,
    mcdiarmid_tail_bound,
    network_certificate,
    recompose_total,
    run_certification,
    theorem1_bound,
    validate_lemma3,
    validate_mcdiarmid,
    validate_ramp_dominance,
    validate_symmetrization,
)
from .errors import (
    BadDelta,
    BadLabel,
    DimensionMismatch,
    DivergedLoss,
    EmptyDataset,
    NoConvergenceWarning,
    NonpositiveGamma,
    NonUniqueStationary,
    NotDiscrete,
    TooLarge,
    WrongKind,
    ZeroSpectralNorm,
)
from .harness import ExperimentConfig, builtin_class, main
from .network import (
    Activation,
    Architecture,
    NetworkParams,
    PopulationEstimate,
    TrainConfig,
    TrainResult,
    empirical_loss,
    forward,
    forward_batch,
    gradient,
    margin,
    margins_batch,
    population_estimate,
    ramp_loss,
    surrogate_loss,
    train_sgd,
    zero_one_loss,
)
from .norms import (
    LayerNorms,
    complexity_from_norms,
    norm_2_1_of_transpose,
    require_positive_spectral,
    spectral_complexity,
    spectral_norm,
)
from .process import (
    EmissionSpec,
    LabeledDataset,
    MarkovSpec,
    MixingProfile,
    ProcessSpec,
    brute_force_phi,
    deterministic_injective,
    marginal_at,
    mixing_profile,
    mu_at,
    phi_coefficient,
    sample_sequence,
    sample_sequences_batch,
    sample_target,
    sequence_value_means,
    stationary_distribution,
    stationary_expectation,
    step_expectations,
    tv_distance,
)
from .seeding import combine_seeds, substream
from .rademacher import (
    FunctionClass,
    RademacherEstimate,
    constant_class,
    covering_bound_terms,
    covering_rademacher_bound,
    empirical_rademacher_exact,
    empirical_rademacher_mc,
    loss_class,
    table_class,
)

__version__ = "0.1.0"
