"""Charge-singlet projection toolkit for small (1+1)-D SU(2)/SU(3) lattice gauge models."""

from .exceptions import FitDiverged, NearZeroSingletWeight, NonProjector, SingletSimError

__all__ = [
    "FitDiverged",
    "NearZeroSingletWeight",
    "NonProjector",
    "SingletSimError",
]

__version__ = "0.1.0"
