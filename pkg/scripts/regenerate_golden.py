#!/usr/bin/env python3
"""Rebuild the golden graph files from the bundled fixture corpus.

Run this only after verifying the intermediates by hand; the test suite
pins the current files byte for byte.
"""

import shutil
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from quotekg.pipeline import PipelineConfig, run  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]


def main():
    with tempfile.TemporaryDirectory() as tmp:
        config = PipelineConfig(
            dumps_dir=str(ROOT / "fixtures" / "dumps"),
            sitelinks_path=str(ROOT / "fixtures" / "sitelinks.tsv"),
            out_dir=tmp,
            min_pages=1,
        )
        report = run("all", config)
        golden = ROOT / "fixtures" / "golden"
        golden.mkdir(parents=True, exist_ok=True)
        for name in ("quotekg.nt", "quotekg.ttl", "void.ttl"):
            shutil.copy(Path(tmp) / name, golden / name)
        print("golden files refreshed:", ", ".join(sorted(report.counters)))


if __name__ == "__main__":
    main()
