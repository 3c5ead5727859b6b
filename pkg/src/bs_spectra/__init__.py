"""Semiclassical spectral toolkit for quantized torus Hamiltonians.

Quantizes real trigonometric-polynomial symbols into 2k x 2k Hermitian
clock-and-shift matrices, predicts their low eigenvalues from action
integrals of the classical sublevel sets, verifies the predictions against
dense diagonalization, and carries an exact truncated-Bargmann realization of
the polynomial Toeplitz symbol calculus.
"""

from .symbols import (
    FourierMode,
    Minimum,
    SublevelAreaCalculator,
    SymplecticNormalization,
    TORUS_NORMALIZATION,
    TrigSymbol,
    action_derivative_at_min,
    find_minimum,
    load_symbol,
    dump_symbol,
    separatrix_energy,
    sublevel_area,
)
from .torus_quant import (
    QuantumTorusParams,
    TorusOperator,
    clock,
    harper,
    shift,
    weyl_quantize,
)
from .spectral import SpectrumResult, eigh, operator_norm
from .bohr_sommerfeld import (
    ActionProfile,
    DecayFit,
    PredictionSet,
    VerificationReport,
    build_action_profile,
    decay_sweep,
    near_minimum_predict,
    predict,
    verify,
)
from .fock_model import (
    FockOperator,
    PolySymbol,
    compose_symbols,
    covariant_from_contravariant,
    contravariant_from_covariant,
    harmonic_oscillator,
    normalized_symbol,
    poisson_bracket,
    quantize,
    quantize_monomial,
    star_bracket_check,
    verify_composition,
)
from .theta_sections import (
    ThetaBasis,
    build_basis,
    eigenfunction_field,
    eigenfunction_modulus,
    gram_defect,
    gram_matrix,
    mass_concentration,
    theta_section_values,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
