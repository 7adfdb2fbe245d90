"""Exact de Rham cohomology of affine varieties with certified degree bounds."""

__version__ = "0.1.0"
