"""Single source of truth for the cvteleport version."""

__version__ = '0.3.0'
