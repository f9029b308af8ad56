"""Flat circle bundles, Milnor-Wood representation builders and related group theory."""

__version__ = "0.1.0"
