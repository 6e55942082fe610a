"""Exact spectrum of the two-qubit quantum Rabi model."""
