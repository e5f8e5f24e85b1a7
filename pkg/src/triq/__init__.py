"""Invariants, canonical forms and entanglement monotones of three-qubit pure states."""
__version__ = "0.1.0"
