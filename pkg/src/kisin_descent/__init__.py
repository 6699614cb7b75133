"""Frobenius descent for a family of rank-two Kisin-type modules over the p-adic disc."""

from .descent import DescentParams, DescentResult, descend, descent_round, error_profile
from .errors import (CheckFailure, KisinError, NoProgress, NotIntegral, ParameterViolation,
                     PrecisionExhausted, PreconditionViolation)
from .family import (DescentReport, FamilyInstance, build_C_ap, integral_descent,
                     reduce_mod_p, run_family_descent, standard_modp)
from .matrix import SeriesMatrix2, monodromy_B, monodromy_residual, twisted_conjugate
from .scalar import PadicScalar, format_scalar, parse_scalar
from .series import DiscSeries, frobenius, invert_unit, lambda_factory, vR

__all__ = [
    "PadicScalar", "format_scalar", "parse_scalar",
    "DiscSeries", "frobenius", "invert_unit", "lambda_factory", "vR",
    "SeriesMatrix2", "twisted_conjugate", "monodromy_B", "monodromy_residual",
    "DescentParams", "DescentResult", "descend", "descent_round", "error_profile",
    "FamilyInstance", "DescentReport", "build_C_ap", "run_family_descent",
    "integral_descent", "reduce_mod_p", "standard_modp",
    "KisinError", "PrecisionExhausted", "NoProgress", "ParameterViolation",
    "PreconditionViolation", "CheckFailure", "NotIntegral",
]
