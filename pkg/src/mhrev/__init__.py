"""Spectral analysis of non-reversible Markov chains through their two
Metropolis-Hastings reversiblizations."""
from .bounds import (
    CrossSlacks,
    MixingProfile,
    TableBounds,
    VortexGapReport,
    asymptotic_variance,
    asymptotic_variance_bound,
    closed_form_gap_bounds,
    exact_mixing_profile,
    exact_sum_variance,
    heterogeneous_variance_bound,
    mixing_time_bound,
    operator_norm_bound_check,
    reversible_mixing_time_bound,
    tv_cross_bounds_check,
    tv_distance,
    variance_bound,
    vortex_gap_bounds,
)
from .errors import *  # noqa: F401,F403
from .expansion import expansion_apply, pseudospectral_reconstruct, pseudospectral_reconstruct_reversal
from .kernels import (
    ProbabilityVector,
    RateGenerator,
    SignedKernel,
    StochasticKernel,
    adjoint,
    is_irreducible,
    is_reversible,
    kernel_power,
    stationarity_residual,
    stationary_distribution,
    time_reversal,
    weighted_inner_product,
)
from .metastability import (
    CheegerBounds,
    LeakageBounds,
    MetastabilityBounds,
    Partition,
    cheeger_bounds,
    conductance,
    conductance_profile,
    flow,
    leakage,
    leakage_bounds,
    metastability_bounds,
    partition_metastability,
)
from .models import (
    GWI,
    MM1,
    Ehrenfest,
    MMInfinity,
    asymmetric_cycle,
    birth_death_generator,
    cyclic_vortex,
    dhn_sampler,
    torus_walk,
    triangle,
    upward_skip_free,
    winning_streak,
)
from .reversiblize import (
    acceptance_mask,
    acceptance_region,
    additive_reversiblization,
    generator_mh_pair,
    mh_first,
    mh_pair,
    mh_second,
    multiplicative_reversiblization,
)
from .spectra import (
    GapRecord,
    GapScanResult,
    PseudoSpectralGap,
    SpectrumReport,
    WeylSandwich,
    jacobi_eigh,
    lazy_contraction_check,
    mean_zero_eigenvalues,
    mh_spectral_gap,
    pseudo_spectral_gap,
    right_spectral_gap,
    self_adjoint_eigh,
    self_adjoint_spectrum,
    weyl_min_slack,
    weyl_sandwich,
)

__version__ = "0.1.0"
