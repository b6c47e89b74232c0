"""Hierarchical reactive controller synthesis on layered two-player games."""

__version__ = "0.1.0"
