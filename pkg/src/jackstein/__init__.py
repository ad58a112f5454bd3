"""Exact and Monte Carlo verification of normal approximation for Jack_α measures."""

__version__ = "0.1.0"
