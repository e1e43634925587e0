"""Student performance prediction and tiered-instruction reporting."""

__version__ = "0.1.0"
