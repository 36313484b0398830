"""Continuous valence-arousal emotion prediction for images.

Feature extraction (color statistics, oriented band-pass scene descriptor,
binary-pattern texture histogram, ingested object and scene-semantic
vectors), a from-scratch feed-forward regressor, a cross-validation and
analysis harness, and an annotation-collection HTTP service.
"""

__version__ = "0.1.0"
