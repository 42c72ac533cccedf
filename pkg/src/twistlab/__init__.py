"""Spherical twists on finite-dimensional algebra models."""

__version__ = "0.1.0"
