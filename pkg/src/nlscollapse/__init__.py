"""Numerical laboratory for collapse, arrest, and nonlinear-damping
continuation in the one-dimensional NLS."""

__version__ = "0.1.0"
