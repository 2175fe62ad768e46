"""Poisson geometry and angle-polarization quantization of action-angle systems."""

from . import expr, poisson, quantize, so3
from .expr import Chart, Coordinate, differentiate, evaluate, parse, to_string
from .poisson import PoissonBivector, bracket, lie_poisson, load_bivector
from .so3 import So3Model

__version__ = "0.1.0"

__all__ = [
    "expr",
    "poisson",
    "quantize",
    "so3",
    "Chart",
    "Coordinate",
    "parse",
    "to_string",
    "differentiate",
    "evaluate",
    "PoissonBivector",
    "bracket",
    "lie_poisson",
    "load_bivector",
    "So3Model",
]
