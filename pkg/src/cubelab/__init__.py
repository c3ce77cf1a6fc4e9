"""Finite groupspaces: cube structures on finite groups, their axioms, factors and Gowers norms."""

__version__ = "0.1.0"
