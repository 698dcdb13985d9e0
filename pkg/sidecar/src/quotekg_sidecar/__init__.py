"""HTTP sidecar serving multilingual embeddings, sentiment and language
detection for the quote pipeline."""

__version__ = "0.1.0"
