"""Numerical lab for planar traveling fronts of reaction-diffusion systems."""

__version__ = "0.1.0"
