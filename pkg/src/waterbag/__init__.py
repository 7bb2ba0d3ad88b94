"""Exact construction and verification of WDVV prepotentials from water-bag superpotentials."""

from .frobenius import c_closed, c_oracle, flat_map, flat_structure, metric_closed, metric_oracle, push_to_flat
from .prepotential import PrepotentialDecomposition, construct, integrate_F, wdvv_check
from .superpotential import WaterBagPotential, lambda_prime, make_waterbag, truncate_plus

__all__ = [
    "PrepotentialDecomposition",
    "WaterBagPotential",
    "c_closed",
    "c_oracle",
    "construct",
    "flat_map",
    "flat_structure",
    "integrate_F",
    "lambda_prime",
    "make_waterbag",
    "metric_closed",
    "metric_oracle",
    "push_to_flat",
    "truncate_plus",
    "wdvv_check",
]
