"""Exact homology engine for generalized toric-code models on CW complexes."""

__version__ = "0.1.0"
