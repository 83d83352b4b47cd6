"""Numerical verification of third-order Leibniz-type operator identities."""

from .corpus import FunctionSpec, builtin_corpus, lookup
from .jet import Jet
from .operators import (
    Characterized,
    LinearDifferential,
    LogPolynomial,
    SecondDerivativeOnly,
    apply,
    residual_id2,
    residual_powers,
)

__all__ = [
    "Characterized",
    "FunctionSpec",
    "Jet",
    "LinearDifferential",
    "LogPolynomial",
    "SecondDerivativeOnly",
    "apply",
    "builtin_corpus",
    "lookup",
    "residual_id2",
    "residual_powers",
]
