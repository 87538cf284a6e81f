"""Multi-hop question generation with graph-augmented transformers."""

__version__ = "0.1.0"
