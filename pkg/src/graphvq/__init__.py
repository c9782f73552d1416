"""Graph-based nearest neighbor search for fast vector quantization"""

__version__ = "0.1.0"
