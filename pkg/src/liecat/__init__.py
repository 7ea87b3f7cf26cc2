"""Numerical computations in concrete Lie categories and Lie monoids."""

from .numerics import ToleranceConfig

__all__ = ["ToleranceConfig"]
__version__ = "0.1.0"
