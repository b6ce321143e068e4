"""REEL: learn PDE parameters from trajectories via decomposed, compressed losses."""

from reel.errors import DataFormatError, DivergenceError, GridMismatchError, ReelError
from reel.field import GridSpec, ScalarField

__version__ = "0.1.0"

__all__ = [
    "DataFormatError",
    "DivergenceError",
    "GridMismatchError",
    "GridSpec",
    "ReelError",
    "ScalarField",
    "__version__",
]
