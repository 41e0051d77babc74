"""Intersection homology, Borel-Moore intersection homology and blown-up
intersection cohomology of filtered simplicial complexes."""

__version__ = "0.1.0"
