"""Distorting field, teleportation channel and protocol simulation."""
