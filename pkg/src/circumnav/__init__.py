"""Range-only circumnavigation of a moving target by a unicycle vehicle."""

__version__ = "0.1.0"
