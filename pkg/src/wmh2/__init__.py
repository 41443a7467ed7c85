"""Pseudo-spectral wave maps into the hyperbolic plane, with gauge, null-form and norm diagnostics."""
__version__ = "0.1.0"
