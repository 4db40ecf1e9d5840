"""Sideband cooling of a trapped ion in the strong sideband coupling regime."""

__version__ = "0.1.0"
