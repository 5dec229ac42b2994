"""Forward and inverse toolkit for the wave model of -u'' + q u on (0, l)."""

from .errors import (
    DataError,
    NotPositiveDefinite,
    NumericError,
    ParameterError,
    SingularityError,
    SLWaveError,
)
from .grid import Grid, GridFunction, Matrix2Field, VectorGridFunction
from .slcore import Potential, load_potential

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "Grid",
    "GridFunction",
    "Matrix2Field",
    "NotPositiveDefinite",
    "NumericError",
    "ParameterError",
    "Potential",
    "SLWaveError",
    "SingularityError",
    "VectorGridFunction",
    "load_potential",
]
