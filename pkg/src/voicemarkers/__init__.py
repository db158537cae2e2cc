"""Acoustic markers for everyday-functioning deficits: feature extraction,
nested cross-validated classification, attribution, and statistics."""

__version__ = "0.1.0"
