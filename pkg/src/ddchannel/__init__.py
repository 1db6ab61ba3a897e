"""Sparse delay-Doppler channel estimation with chirp-family probes on Z_N."""

__version__ = "0.1.0"
