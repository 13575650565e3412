"""Norm derivatives, Birkhoff-James orthogonality and bilinear operator geometry on l_p spaces."""

from .spaces import SpaceSpec, Vector, lp, norm, prodmax, sum1

__version__ = "0.1.0"

__all__ = ["SpaceSpec", "Vector", "lp", "sum1", "prodmax", "norm"]
