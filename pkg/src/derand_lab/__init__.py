"""Desk-scale experiments on randomized constructions and their seed lengths."""

__version__ = "0.1.0"
