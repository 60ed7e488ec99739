"""Privacy protectability metrics over tabular feature streams."""

__version__ = "0.1.0"
