"""Spectral toolkit for the angular Smoluchowski equation of rod-like polymers."""

__version__ = "0.1.0"
