import sys
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

sys.path.insert(0, str(Path(__file__).resolve().parent))

from quotekg_sidecar.config import Settings  # noqa: E402
from quotekg_sidecar.service import create_app  # noqa: E402


@pytest.fixture(scope="session")
def offline_client():
    app = create_app(Settings(backend="hash", batch_limit=16))
    with TestClient(app) as client:
        yield client
