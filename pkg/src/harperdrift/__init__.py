"""Spectra, symmetries, and drifting-parameter dynamics of the quantized
pendulum on a torus."""

__version__ = "0.1.0"
