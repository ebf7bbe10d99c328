"""Hybrid-corn technology improvement rate analysis from patents and field trials."""

__version__ = "0.1.0"
