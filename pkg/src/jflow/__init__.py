"""Exact and numerical tools for the J-equation on surfaces and its vortex reductions."""

__version__ = "0.1.0"
