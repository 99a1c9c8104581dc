"""hypdiam: diameter experiments on random surfaces glued from symmetric pants."""

__version__ = "0.1.0"
