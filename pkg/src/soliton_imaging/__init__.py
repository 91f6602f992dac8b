"""Position information in images of a one-dimensional Bose gas with a dark soliton."""

__version__ = "0.1.0"
