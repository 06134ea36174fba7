"""LT and concatenated fountain codes over the erasure channel, with analysis tools."""

__version__ = "0.1.0"
