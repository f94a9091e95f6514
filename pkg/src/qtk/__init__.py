"""Kernels, GNS spaces and cocycles on finite quasi-trees."""

__version__ = "0.1.0"
