"""Legendre transforms: expressions, numerical engines, dual jets, special
functions and a verified catalog of transform pairs."""

__version__ = "0.1.0"
