"""Executable constructions from combination theorems for Cannon-Thurston maps."""

__version__ = "0.1.0"
