"""Linear relations among solutions of Mahler systems and among their values."""

__version__ = "0.1.0"
