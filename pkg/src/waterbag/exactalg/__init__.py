"""Exact coefficient arithmetic: rationals, sparse polynomials, series, residues."""

from fractions import Fraction as BigRational

from .frac import Entry, Frac, PoleStructureError, split_factors
from .multipoly import MultiPoly, natural_key
from .ratfunc import RationalFunction, residue_at_infinity, residue_at_pole
from .series import (
    NotInvertibleError,
    PSeries,
    TruncationError,
    compose,
    series_pow,
    series_reciprocal,
    series_revert,
    taylor_coefficient,
)

__all__ = [
    "BigRational",
    "Entry",
    "Frac",
    "MultiPoly",
    "NotInvertibleError",
    "PSeries",
    "PoleStructureError",
    "RationalFunction",
    "TruncationError",
    "compose",
    "natural_key",
    "residue_at_infinity",
    "residue_at_pole",
    "series_pow",
    "series_reciprocal",
    "series_revert",
    "split_factors",
    "taylor_coefficient",
]
