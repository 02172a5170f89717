"""Pseudo-spectral simulator and verification harness for stratified 2D IPM."""
from .errors import (
    BlowUpError,
    ConsistencyError,
    ParameterError,
    ParityError,
    RefinementError,
    ShapeError,
)
from .fields import (
    PlaneQuadrature,
    StripFieldX,
    StripFieldY,
    StripGrid,
    TorusField,
    TorusGrid,
    evaluate,
    physical_product,
    sample_profile,
    strip_forward_X,
    strip_forward_Y,
    strip_inverse_X,
    strip_inverse_Y,
    torus_forward,
    torus_inverse,
)
from .operators import NormSpec, biot_savart, derivative, divergence, norm, parse_norm, riesz1
from .propagator import DecayCurve, WitnessSpec, semigroup_apply, sharpness_witness
from .solver import InitialData, SigmaSpec, SolverConfig, run

__all__ = [
    "BlowUpError", "ConsistencyError", "ParameterError", "ParityError", "RefinementError", "ShapeError",
    "PlaneQuadrature", "StripFieldX", "StripFieldY", "StripGrid", "TorusField", "TorusGrid", "evaluate",
    "physical_product", "sample_profile", "strip_forward_X", "strip_forward_Y", "strip_inverse_X",
    "strip_inverse_Y", "torus_forward", "torus_inverse", "NormSpec", "biot_savart", "derivative",
    "divergence", "norm", "parse_norm", "riesz1", "DecayCurve", "WitnessSpec", "semigroup_apply",
    "sharpness_witness", "InitialData", "SigmaSpec", "SolverConfig", "run",
]
