def real_model_available():
    try:
        from quotekg_sidecar.backends import RealEmbedding
        from quotekg_sidecar.config import DEFAULT_EMBEDDING_MODEL

        RealEmbedding(DEFAULT_EMBEDDING_MODEL)
        return True
    except Exception:
        return False
