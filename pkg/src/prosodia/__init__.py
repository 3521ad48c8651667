"""Feature-level emotional voice conversion toolkit.

Non-parallel spectrum and prosody mapping between emotion classes:
multi-scale wavelet analysis of F0, adversarially trained feature
generators, a log-Gaussian linear F0 baseline, and objective evaluation.
"""

__version__ = "0.1.0"
