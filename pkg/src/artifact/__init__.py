"""Exact and numerical tools for metric groups and the modular data built from them."""

__version__ = "0.1.0"
