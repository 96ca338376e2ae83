"""Gaussian state representation and EPR statistics."""
