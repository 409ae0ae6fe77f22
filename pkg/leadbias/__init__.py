"""Lead-bias diagnostics and countermeasures for extractive summarization."""

__version__ = "1.0.0"
