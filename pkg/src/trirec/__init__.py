"""Three-term recursion families: evaluation, spectra, quadrature and asymptotics."""

__version__ = "0.1.0"

from .errors import NumericalError, ParameterError, TrirecError
from .families import from_spec
from .recursion import StandardRecursion, evaluate_sequence

__all__ = [
    "NumericalError",
    "ParameterError",
    "StandardRecursion",
    "TrirecError",
    "evaluate_sequence",
    "from_spec",
]
