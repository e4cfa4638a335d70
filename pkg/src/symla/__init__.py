"""Symmetric black-box meta-learned agents trained with evolution strategies."""

__version__ = "0.1.0"

from .mathcore import Rng

__all__ = ["Rng", "__version__"]
