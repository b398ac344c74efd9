"""LTL reactive synthesis with semantically labelled parity automata."""

__version__ = "0.1.0"
