"""Non-unitary split-step walks: spectra, GBZ contours, winding numbers."""

__version__ = "0.1.0"

from .errors import WalkError
from .walk import WalkParams

__all__ = ["WalkError", "WalkParams", "__version__"]
