"""Open-world knowledge-graph question answering engine."""

__version__ = "0.1.0"
