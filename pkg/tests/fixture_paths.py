from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
WIKITEXT_FIXTURES = Path(__file__).resolve().parent / "fixtures" / "wikitext"
