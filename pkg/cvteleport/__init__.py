"""Continuous-variable teleportation of Gaussian states."""
