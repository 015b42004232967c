"""Decoherence analysis for multimode open quantum harmonic oscillators."""

from .errors import OQHOError
from .model import OscillatorModel, build_state_space, canonical_theta, spectral_structure, validate

__version__ = "0.1.0"

__all__ = [
    "OQHOError",
    "OscillatorModel",
    "build_state_space",
    "canonical_theta",
    "spectral_structure",
    "validate",
]
