"""Ratios of bivariate 1-Fréchet random vectors given by spectral measures."""

__version__ = "0.1.0"
