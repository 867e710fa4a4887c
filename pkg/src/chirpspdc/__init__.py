"""Biphoton spectra from chirped quasi-phase-matched crystals."""

__version__ = "0.1.0"
