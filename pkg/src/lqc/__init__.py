"""lqc: type checking and evaluation for a small language with linear constraints."""

__version__ = "0.1.0"
