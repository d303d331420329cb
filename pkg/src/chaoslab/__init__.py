"""Numerical experiments for intermittent maps and chaotic billiards."""
from ._jit import backend

__version__ = "0.1.0"

__all__ = ["__version__", "backend"]
