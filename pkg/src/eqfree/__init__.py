"""Equations over free groups: generalized equations, elimination and Stallings graphs."""

__version__ = "0.1.0"
