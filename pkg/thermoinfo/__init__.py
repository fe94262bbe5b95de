"""Information gain, relative entropy and entropy production for symbolic dynamics."""

__version__ = "0.1.0"
