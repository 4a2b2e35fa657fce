"""Exact Lie algebroid calculus and Kuranishi local models over a point."""

__version__ = "0.1.0"
