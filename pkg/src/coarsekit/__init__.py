"""Finite-scale toolkit for weak expander sequences and box spaces."""

__version__ = "0.1.0"
