"""Utility functions."""
from .output_writer import OutputWriter, format_float
from .seeds import derive_seed, make_rng, splitmix64

__all__ = ["OutputWriter", "format_float", "derive_seed", "make_rng", "splitmix64"]
