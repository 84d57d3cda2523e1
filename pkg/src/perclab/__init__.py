"""Percolation and coarse-geometry laboratory for finite transitive graphs."""

from .graphs import FiniteGraph, GraphSpecError, generate, metric_profile

__version__ = "0.1.0"

__all__ = ["FiniteGraph", "GraphSpecError", "generate", "metric_profile", "__version__"]
