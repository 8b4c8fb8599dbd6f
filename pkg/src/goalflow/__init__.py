"""Goal-driven dialogue engine for enterprise assistant workflows."""

__version__ = "0.1.0"
