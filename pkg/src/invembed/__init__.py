"""Name-invariant hypergraph embeddings of first-order clause sets."""

__version__ = "0.1.0"
