"""Spectral computations for right quaternionic linear operators on H^n."""

from .analysis import (
    deflate_sphere,
    finite_type_check,
    isolated_parts,
    min_modulus,
    multiplicity,
    multiplicity_sum_check,
    projector_uniqueness_check,
    rank_one_shift,
    resolvent_neighborhood,
    riesz_decompose,
    spectral_mapping_power,
)
from .calculus import (
    divide_companion,
    poly_calculus,
    poly_direct,
    riesz_projection,
    s_resolvent,
)
from .errors import (
    DegenerateCase,
    DependentInput,
    DivergentSeed,
    EigenFailure,
    InvalidArgument,
    NotInSpectrum,
    NotIsolated,
    OnSpectrum,
    ParseError,
    QSpectraError,
    RankMismatch,
    SingularOperator,
    SpectraNotDisjoint,
    ZeroImage,
)
from .io import dumps, load_matrix, load_spectrum, save
from .qlinalg import QMatrix, SpectrumResult, apply_Qq, chi, gram_schmidt, hausdorff, qrank, qsolve, s_spectrum
from .quaternion import UNIT_I, UNIT_J, UNIT_K, ImaginaryUnit, Quaternion, Sphere, canonical, sphere_point
from .shift import approx_eigvector, exterior_margin, perturbation_experiment, truncated_shift

__version__ = "0.1.0"

__all__ = [
    "DegenerateCase",
    "DependentInput",
    "DivergentSeed",
    "EigenFailure",
    "ImaginaryUnit",
    "InvalidArgument",
    "NotInSpectrum",
    "NotIsolated",
    "OnSpectrum",
    "ParseError",
    "QMatrix",
    "QSpectraError",
    "Quaternion",
    "RankMismatch",
    "SingularOperator",
    "SpectraNotDisjoint",
    "SpectrumResult",
    "Sphere",
    "UNIT_I",
    "UNIT_J",
    "UNIT_K",
    "ZeroImage",
    "apply_Qq",
    "approx_eigvector",
    "canonical",
    "chi",
    "deflate_sphere",
    "divide_companion",
    "dumps",
    "exterior_margin",
    "finite_type_check",
    "gram_schmidt",
    "hausdorff",
    "isolated_parts",
    "load_matrix",
    "load_spectrum",
    "min_modulus",
    "multiplicity",
    "multiplicity_sum_check",
    "perturbation_experiment",
    "poly_calculus",
    "poly_direct",
    "projector_uniqueness_check",
    "qrank",
    "qsolve",
    "rank_one_shift",
    "resolvent_neighborhood",
    "riesz_decompose",
    "riesz_projection",
    "s_resolvent",
    "s_spectrum",
    "save",
    "spectral_mapping_power",
    "sphere_point",
    "truncated_shift",
]
