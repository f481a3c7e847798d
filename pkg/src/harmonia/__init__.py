"""Harmonia: a real-time spectral modeling synthesizer.

Harmonic additive synthesis plus filtered-noise subtractive synthesis and
convolution reverb, driven by MIDI events or live pitch tracking, with
timbre models loaded from disk standing in for a neural decoder.
"""

__version__ = "0.1.0"
