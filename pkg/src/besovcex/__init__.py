"""Dyadic block constructions and finite-difference Besov norm estimation."""

__version__ = "0.1.0"
