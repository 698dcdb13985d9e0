"""End-to-end: serve the sidecar over HTTP and drive the pipeline CLI
against it. The pipeline is consumed purely through its command line."""

import json
import socket
import subprocess
import sys
import time
from pathlib import Path

import pytest
import requests

REPO = Path(__file__).resolve().parents[2]
FIXTURES = REPO / "fixtures"


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="module")
def sidecar_url():
    port = free_port()
    env = {
        "QUOTEKG_SIDECAR_BACKEND": "hash",
        "QUOTEKG_SIDECAR_PORT": str(port),
        "PATH": "/usr/bin:/bin",
    }
    proc = subprocess.Popen(
        [sys.executable, "-m", "quotekg_sidecar"],
        env=env,
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
    )
    url = f"http://127.0.0.1:{port}"
    try:
        for _ in range(100):
            try:
                if requests.get(f"{url}/health", timeout=1).status_code == 200:
                    break
            except requests.ConnectionError:
                time.sleep(0.1)
        else:
            raise RuntimeError("sidecar did not come up")
        yield url
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_pipeline_against_live_sidecar(sidecar_url, tmp_path):
    out = tmp_path / "out"
    result = subprocess.run(
        [
            sys.executable,
            "-m",
            "quotekg.cli",
            "run",
            "all",
            "--dumps-dir",
            str(FIXTURES / "dumps"),
            "--sitelinks",
            str(FIXTURES / "sitelinks.tsv"),
            "--min-pages",
            "1",
            "--nlp-endpoint",
            sidecar_url,
            "--out",
            str(out),
        ],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr

    header = json.loads((out / "mentions.ndjson").read_text().splitlines()[0])
    assert header["degraded"] is False
    assert header["backend_tag"] == "hash-char-trigram-512"

    clusters_header = json.loads((out / "clusters.ndjson").read_text().splitlines()[0])
    assert clusters_header["embedding_tags"] == ["hash-char-trigram-512"]

    graph = (out / "quotekg.nt").read_text()
    assert "hasEmotionSet" in graph  # sentiment flowed through to the triples
    assert "hasEmotionIntensity" in graph
    # language detection ran server-side: the same language tags as offline mode
    assert '"Wir schaffen das."@de' in graph
    assert "@fr" in graph


def test_embed_contract_over_http(sidecar_url):
    first = requests.post(f"{sidecar_url}/embed", json={"texts": ["a", "b"]}, timeout=10).json()
    second = requests.post(f"{sidecar_url}/embed", json={"texts": ["a", "b"]}, timeout=10).json()
    assert first == second
    assert len(first["vectors"]) == 2
