"""Exact and Monte Carlo checks of compatibility, strong solutions and pathwise uniqueness."""

__version__ = "0.1.0"
