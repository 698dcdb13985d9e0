#!/usr/bin/env python3
"""Demo: run the whole pipeline on the bundled corpus and print the
evaluation-style statistics of the resulting graph."""

import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def main():
    out = Path(tempfile.mkdtemp(prefix="quotekg-demo-"))
    base = [sys.executable, "-m", "quotekg.cli"]
    subprocess.run(
        base
        + [
            "run",
            "all",
            "--dumps-dir",
            str(ROOT / "fixtures" / "dumps"),
            "--sitelinks",
            str(ROOT / "fixtures" / "sitelinks.tsv"),
            "--min-pages",
            "1",
            "--out",
            str(out),
        ],
        check=True,
    )
    subprocess.run(base + ["stats", "--graph", str(out / "quotekg.nt")], check=True)
    print(f"\nartifacts in {out}")


if __name__ == "__main__":
    main()
