"""Witness-isolation reductions and small quantum-verifier experiments."""

__version__ = "0.1.0"
