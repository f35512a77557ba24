"""Numerical tests of the L1/L2 dichotomy for convolution powers of orbital measures."""

__version__ = "0.1.0"
