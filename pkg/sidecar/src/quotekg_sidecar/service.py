"""HTTP service: /embed, /sentiment, /langdetect, /health.

Contract notes: responses preserve request order; embedding vectors are
L2-normalized; batch size is limited (400 on violation); 503 while models
are still loading."""

from __future__ import annotations

import threading

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .backends import build_backends
from .config import Settings
from .detectors import detect_many


class TextsRequest(BaseModel):
    texts: list[str]


class EmbedResponse(BaseModel):
    model_tag: str
    dim: int
    vectors: list[list[float]]


class SentimentItem(BaseModel):
    category: str
    score: float


class SentimentResponse(BaseModel):
    model_tag: str
    results: list[SentimentItem]


class LangDetectItem(BaseModel):
    language_code: str
    confidence: float


class LangDetectResponse(BaseModel):
    results: list[LangDetectItem]


def create_app(settings: Settings | None = None, preload: bool = True) -> FastAPI:
    settings = settings or Settings.from_env()
    app = FastAPI(
        title="quotekg nlp sidecar",
        description="Multilingual sentence embeddings, sentiment and language detection.",
        version="0.1.0",
    )
    state = {"embedding": None, "sentiment": None, "loading": False, "error": None}
    lock = threading.Lock()

    def load_models():
        with lock:
            if state["embedding"] is not None or state["loading"]:
                return
            state["loading"] = True
        try:
            embedding, sentiment = build_backends(settings)
            state["embedding"] = embedding
            state["sentiment"] = sentiment
            state["error"] = None
        except Exception as exc:  # `real` backend requested but unavailable
            state["error"] = str(exc)
        finally:
            state["loading"] = False

    if preload:
        load_models()
    else:
        app.add_event_handler("startup", lambda: threading.Thread(target=load_models).start())

    def validated_texts(request: TextsRequest) -> list[str]:
        texts = request.texts
        if not texts:
            raise HTTPException(status_code=400, detail="texts must be non-empty")
        if len(texts) > settings.batch_limit:
            raise HTTPException(
                status_code=400,
                detail=f"batch of {len(texts)} exceeds limit {settings.batch_limit}",
            )
        if any(not isinstance(t, str) or not t.strip() for t in texts):
            raise HTTPException(status_code=400, detail="texts must be non-blank strings")
        return texts

    def embedding_backend():
        if state["embedding"] is None:
            raise HTTPException(
                status_code=503,
                detail=state["error"] or "model loading, retry shortly",
            )
        return state["embedding"]

    def sentiment_backend():
        if state["sentiment"] is None:
            raise HTTPException(
                status_code=503,
                detail=state["error"] or "model loading, retry shortly",
            )
        return state["sentiment"]

    @app.post("/embed", response_model=EmbedResponse)
    def embed(request: TextsRequest):
        texts = validated_texts(request)
        backend = embedding_backend()
        matrix = np.asarray(backend.encode(texts), dtype=float)
        norms = np.linalg.norm(matrix, axis=1, keepdims=True)
        matrix = matrix / np.where(norms == 0.0, 1.0, norms)
        return EmbedResponse(
            model_tag=backend.model_tag,
            dim=int(matrix.shape[1]),
            vectors=[[float(x) for x in row] for row in matrix],
        )

    @app.post("/sentiment", response_model=SentimentResponse)
    def sentiment(request: TextsRequest):
        texts = validated_texts(request)
        backend = sentiment_backend()
        results = backend.classify(texts)
        for item in results:
            item["score"] = min(1.0, max(0.0, float(item["score"])))
        return SentimentResponse(model_tag=backend.model_tag, results=results)

    @app.post("/langdetect", response_model=LangDetectResponse)
    def langdetect(request: TextsRequest):
        texts = validated_texts(request)
        return LangDetectResponse(
            results=[
                LangDetectItem(language_code=code, confidence=confidence)
                for code, confidence in detect_many(texts)
            ]
        )

    @app.get("/health")
    def health():
        embedding = state["embedding"]
        sentiment = state["sentiment"]
        if embedding is None:
            status = "loading" if state["loading"] or state["error"] is None else "error"
        else:
            status = "ok" if embedding.kind == "real" else "degraded"
        return {
            "status": status,
            "model_tag": embedding.model_tag if embedding else None,
            "dim": embedding.dim if embedding else None,
            "embedding_backend": embedding.kind if embedding else None,
            "sentiment_backend": sentiment.kind if sentiment else None,
            "sentiment_model_tag": sentiment.model_tag if sentiment else None,
            "langdetect": "stopword-profiles-v1",
            "batch_limit": settings.batch_limit,
            "error": state["error"],
        }

    return app
