"""Exact finitary Hall-algebra engine for torsion pairs, HN filtrations and pair counting."""

__version__ = "0.1.0"
