"""Diagrammatic centralizer algebras and rational R-matrices."""

__version__ = "0.1.0"
