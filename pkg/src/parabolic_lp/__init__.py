"""Parabolic Littlewood-Paley analysis on grids.

Anisotropic geometry, spectral field calculus, dyadic decompositions, the
parabolic function-space norms, the higher-order reflection extension and a
lab for evaluating logarithmic Sobolev-type inequalities over test families.
"""
from .exceptions import (ConfigurationError, DataError, HypothesisError, PLPError,
                         PreconditionError, StructuralError)
from .geometry import Anisotropy, Box, ParabolicCube, SamplerPolicy, aniso_distance, cube_sampler
from .field import Field, Grid, VectorField, antiderivative, gradient, mean_subtract
from .littlewood_paley import CutoffProfile, build_symbol_bank, lp_decompose, radial_majorant
from .norms import NormSpec, evaluate_norm
from .extension import extend_to_box, extension_coefficients, localize
from .io import load_field, save_field

__version__ = "0.1.0"

_LAZY = {"LittlewoodPaleyDecomposer", "ReflectionExtender", "ConstantFitter", "check_field"}


def __getattr__(name):
    # the estimators pull in scikit-learn; import on first use
    if name in _LAZY:
        from . import estimators
        return getattr(estimators, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
