"""Nonclassicality quasiprobabilities from homodyne data."""
__version__ = "0.1.0"
