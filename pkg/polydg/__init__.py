"""Hybridized polygonal DG solver for the Poisson problem with negative-norm stabilization."""

__version__ = "0.1.0"
