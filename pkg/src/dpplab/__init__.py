"""Determinantal point processes, log-gases, determinantal martingales, multiple SLE and GFF couplings."""

__version__ = "0.1.0"
