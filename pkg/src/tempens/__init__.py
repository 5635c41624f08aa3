"""Canonical Gibbs ensembles over discrete spectra.

Exponential radioactive decay is the time-flavored special case: the survival
law is the Boltzmann distribution of a discrete time spectrum, the decay
constant playing the inverse-temperature role. The package computes the
weights and their observables, inverts the mean-rate map, runs Monte Carlo
decay experiments with exact reproducibility, and verifies the operator-level
identities of the construction.
"""

from ._backend import backend_name
from .decay_sim import (
    DecaySample,
    DegenerateSampleError,
    FitResult,
    empirical_survival,
    estimate_lambda,
    expected_survival,
    goodness_of_fit,
    sample_decay_times,
)
from .ensemble import (
    GibbsWeights,
    SurvivalCurve,
    boltzmann_weights,
    entropy_trace,
    log_partition_function,
    mean,
    persistence,
    survival_curve,
    variance,
)
from .maxent import (
    ConvergenceError,
    DerivativeCheckReport,
    LambdaSolveResult,
    MaxentReport,
    UnattainableTargetError,
    attainable_mean_interval,
    finite_difference_rate_check,
    harmonic_mean_closed_form,
    harmonic_rate_closed_form,
    maxent_verify,
    mean_vs_rate,
    solve_rate_for_mean,
)
from .operator_algebra import (
    DensityOperator,
    HermitianOperator,
    assemble_canonical_state,
    commutator,
    conjugate_by_generated_unitary,
    generator_operator,
    projector,
    tensor,
)
from .spectra import (
    KIND_ENERGY,
    KIND_TIME,
    HarmonicParams,
    Spectrum,
    harmonic_time_spectrum,
    make_explicit_spectrum,
    read_spectrum_file,
    truncate_by_tail_mass,
    write_spectrum_file,
)

__version__ = "0.1.0"

__all__ = [
    "DecaySample",
    "DegenerateSampleError",
    "FitResult",
    "empirical_survival",
    "estimate_lambda",
    "expected_survival",
    "goodness_of_fit",
    "sample_decay_times",
    "GibbsWeights",
    "SurvivalCurve",
    "boltzmann_weights",
    "entropy_trace",
    "log_partition_function",
    "mean",
    "persistence",
    "survival_curve",
    "variance",
    "ConvergenceError",
    "DerivativeCheckReport",
    "LambdaSolveResult",
    "MaxentReport",
    "UnattainableTargetError",
    "attainable_mean_interval",
    "finite_difference_rate_check",
    "harmonic_mean_closed_form",
    "harmonic_rate_closed_form",
    "maxent_verify",
    "mean_vs_rate",
    "solve_rate_for_mean",
    "DensityOperator",
    "HermitianOperator",
    "assemble_canonical_state",
    "commutator",
    "conjugate_by_generated_unitary",
    "generator_operator",
    "projector",
    "tensor",
    "KIND_ENERGY",
    "KIND_TIME",
    "HarmonicParams",
    "Spectrum",
    "harmonic_time_spectrum",
    "make_explicit_spectrum",
    "read_spectrum_file",
    "truncate_by_tail_mass",
    "write_spectrum_file",
    "backend_name",
    "__version__",
]
