"""Weak values of quickly oscillating pure states compared with fundamentally mixed states."""

__version__ = "0.1.0"
