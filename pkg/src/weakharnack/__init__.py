"""Potential theory on finite metric measure spaces with mixed Dirichlet forms."""

__version__ = "0.1.0"
