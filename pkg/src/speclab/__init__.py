"""Finite element laboratory for boundary eigenvalue problems on differential forms."""

__version__ = "0.1.0"
