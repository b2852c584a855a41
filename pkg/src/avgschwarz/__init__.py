"""Additive average Schwarz preconditioning with spectrally enriched coarse spaces."""
__version__ = "0.1.0"
