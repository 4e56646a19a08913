"""Measurement quality, reduction and collapse bounds on finite-dimensional C*-algebras."""
from .algebra import AlgebraShape, Element, commutator, distance_to_center, spectral_decompose
from .maps import CPMap, apply_heisenberg, dual_apply
from .measurement import MeasurementSetup, quality
from .report import BoundReport
from .states import State

__version__ = "0.1.0"

__all__ = [
    "AlgebraShape",
    "Element",
    "State",
    "CPMap",
    "MeasurementSetup",
    "BoundReport",
    "apply_heisenberg",
    "dual_apply",
    "commutator",
    "distance_to_center",
    "spectral_decompose",
    "quality",
]
