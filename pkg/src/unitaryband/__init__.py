"""Spectral diagnostics for unitary band operators built from 2x2 scattering blocks."""

__version__ = "0.1.0"
