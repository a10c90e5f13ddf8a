"""Burgers equation under exponentially growing dissipation.

Pseudo-spectral ETDRK4 simulation, exact arbitrary-precision coefficients
for half-space data, and asymptotic extrapolation of the k ln k decay law.
"""

from .asymptotics import (
    CANONICAL_STACK,
    BalancePrediction,
    ExtrapolationReport,
    Sequence,
    TransformId,
    apply_transform,
    check_decay_bound,
    naive_discrepancy,
    run_pipeline,
    solve_balance,
)
from .dissipation import DissipationSymbol, Family, growth_exponent, rate
from .exact import ExpSum, compute_coefficients, convolve, evaluate, integrate_against_kernel
from .solver import (
    EtdCoefficients,
    MinusSine,
    SingleComplexMode,
    SolverConfig,
    precompute_coefficients,
    run,
    step,
)
from .spectral_core import (
    Grid,
    SpectralField,
    dealiased_product,
    forward_transform,
    inverse_transform,
    nonlinear_term,
)

__version__ = "0.1.0"
