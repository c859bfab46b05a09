"""Finite abstractions and output-feedback controller synthesis for transition systems."""

__version__ = "0.1.0"
