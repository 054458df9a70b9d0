"""Separation of variables for lambda-connections on hyperelliptic curves."""

__version__ = "0.1.0"
