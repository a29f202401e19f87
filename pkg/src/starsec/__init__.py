"""Secrecy performance toolkit for STAR-RIS assisted NOMA downlinks."""
__version__ = "0.1.0"
