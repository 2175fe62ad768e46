"""Geometric quantization of action-angle systems in the angle polarization."""

from .checks import (
    DiracConvergence,
    GaugeReport,
    NonHermitianError,
    WitnessResult,
    dirac_consistency_residual,
    dirac_convergence,
    dirac_residual,
    dirac_residual_operator,
    gauge_spectrum_check,
    interior_norm,
    noncommutativity_witness,
    self_adjointness_residual,
    spectrum,
)
from .operators import (
    AffineObservable,
    DiscreteOperator,
    UnsupportedObservableError,
    angle_derivative,
    casimir_operator,
    fourier_coefficients,
    hamiltonian_operator,
    multiplication_operator,
    quantize_observable,
)
from .space import ActionAngleSpace, QuantizationParams
from .wavefunction import WaveFunction, inner_product, trapezoid_weights

__all__ = [
    "ActionAngleSpace",
    "QuantizationParams",
    "WaveFunction",
    "inner_product",
    "trapezoid_weights",
    "AffineObservable",
    "DiscreteOperator",
    "UnsupportedObservableError",
    "quantize_observable",
    "multiplication_operator",
    "angle_derivative",
    "fourier_coefficients",
    "hamiltonian_operator",
    "casimir_operator",
    "NonHermitianError",
    "interior_norm",
    "dirac_residual",
    "dirac_residual_operator",
    "dirac_consistency_residual",
    "DiracConvergence",
    "dirac_convergence",
    "WitnessResult",
    "noncommutativity_witness",
    "spectrum",
    "GaugeReport",
    "gauge_spectrum_check",
    "self_adjointness_residual",
]
