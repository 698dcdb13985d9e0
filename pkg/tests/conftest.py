import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from fixture_paths import FIXTURES  # noqa: E402


@pytest.fixture(scope="session")
def default_rules():
    from quotekg.rules import load_default_rules

    return load_default_rules()


@pytest.fixture(scope="session")
def sitelinks():
    from quotekg.ingest import SitelinkIndex

    return SitelinkIndex.load(FIXTURES / "sitelinks.tsv")


@pytest.fixture
def fixture_config(tmp_path):
    from quotekg.pipeline import PipelineConfig

    def make(out=None, **kwargs):
        defaults = dict(
            dumps_dir=str(FIXTURES / "dumps"),
            sitelinks_path=str(FIXTURES / "sitelinks.tsv"),
            out_dir=str(out or tmp_path / "out"),
            min_pages=1,
        )
        defaults.update(kwargs)
        return PipelineConfig(**defaults)

    return make
