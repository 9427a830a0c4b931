"""Executable Morse, weak Morse and local-to-global checks on finite Cayley balls."""
__version__ = "0.1.0"
