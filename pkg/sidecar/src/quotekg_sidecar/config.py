"""Environment-driven settings."""

from __future__ import annotations

import os
from dataclasses import dataclass

DEFAULT_EMBEDDING_MODEL = "sentence-transformers/paraphrase-multilingual-MiniLM-L12-v2"
DEFAULT_SENTIMENT_MODEL = "cardiffnlp/twitter-xlm-roberta-base-sentiment"


@dataclass
class Settings:
    backend: str = "auto"  # auto | real | hash
    embedding_model: str = DEFAULT_EMBEDDING_MODEL
    sentiment_model: str = DEFAULT_SENTIMENT_MODEL
    batch_limit: int = 256
    port: int = 8090

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            backend=os.environ.get("QUOTEKG_SIDECAR_BACKEND", "auto"),
            embedding_model=os.environ.get("QUOTEKG_SIDECAR_EMBEDDING_MODEL", DEFAULT_EMBEDDING_MODEL),
            sentiment_model=os.environ.get("QUOTEKG_SIDECAR_SENTIMENT_MODEL", DEFAULT_SENTIMENT_MODEL),
            batch_limit=int(os.environ.get("QUOTEKG_SIDECAR_BATCH_LIMIT", "256")),
            port=int(os.environ.get("QUOTEKG_SIDECAR_PORT", "8090")),
        )
