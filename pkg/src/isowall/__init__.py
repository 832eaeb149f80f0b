"""Transparent domain walls between isospectral one-dimensional crystals."""

__version__ = "0.1.0"
